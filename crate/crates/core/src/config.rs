//! Dimensionless system configuration.
//!
//! Everything is expressed in natural units ħ = m = ω = 1: temperatures as
//! θ = kT/ħω, damping as g = γ/ω, couplings as fractions of mω², frequencies
//! as fractions of ω.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Internal integration grid resolution: fine steps per drive period.
/// The kernel double sums, the fundamental solutions and the covariance
/// sampling all share this uniform grid.
pub const FINE_STEPS_PER_PERIOD: usize = 2048;

/// How the parametric drive enters the normal-mode frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveKind {
    /// Ω±²(t) = 1 ± (κ0 + κ1 cos δt): the inter-oscillator coupling is modulated.
    CouplingModulation,
    /// Ω±²(t) = (1 + ω1 sin δt)² ± κ0: the bare frequencies are modulated,
    /// the coupling stays at κ0.
    FrequencyModulation,
}

impl DriveKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "coupling-modulation" | "coupling" => Ok(DriveKind::CouplingModulation),
            "frequency-modulation" | "frequency" => Ok(DriveKind::FrequencyModulation),
            other => Err(Error::Config(format!(
                "drive_kind: unknown value '{other}' (expected coupling-modulation or frequency-modulation)"
            ))),
        }
    }
}

/// Which normal mode, Q± = (Q1 ± Q2)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Plus,
    Minus,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Plus, Mode::Minus];

    /// Sign with which the coupling enters this mode's frequency.
    pub fn sign(self) -> f64 {
        match self {
            Mode::Plus => 1.0,
            Mode::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Plus => "+",
            Mode::Minus => "-",
        }
    }
}

/// All physical and numerical parameters of a run, in natural units.
#[derive(Debug, Clone, Serialize)]
pub struct SystemConfig {
    /// Bath temperature θ = kT/ħω.
    pub theta: f64,
    /// Damping g = γ/ω.
    pub g: f64,
    /// Static coupling κ0 = c0/mω².
    pub kappa0: f64,
    /// Drive amplitude κ1 = c1/mω² (coupling modulation).
    pub kappa1: f64,
    /// Drive frequency δ = ω_d/ω.
    pub delta: f64,
    /// Bath cutoff Λc = ω_c/ω (exponential cutoff).
    pub cutoff: f64,
    pub drive_kind: DriveKind,
    /// Frequency-modulation amplitude ω1/ω (only used for frequency drives).
    pub omega1: f64,
    /// Covariance sampling interval as a fraction of the drive period.
    pub time_step: f64,
    /// Simulation horizon in drive periods.
    pub horizon: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            theta: 10.0,
            g: 0.01,
            kappa0: 0.0,
            kappa1: 0.5,
            delta: 1.996,
            cutoff: 50.0,
            drive_kind: DriveKind::CouplingModulation,
            omega1: 0.0,
            time_step: 1.0 / 32.0,
            horizon: 40.0,
        }
    }
}

impl SystemConfig {
    /// Drive period T_d = 2π/δ in natural time units.
    pub fn drive_period(&self) -> f64 {
        2.0 * PI / self.delta
    }

    /// Fine integration step.
    pub fn fine_step(&self) -> f64 {
        self.drive_period() / FINE_STEPS_PER_PERIOD as f64
    }

    /// Number of fine grid points (index 0..=n covers [0, horizon]).
    pub fn fine_steps(&self) -> usize {
        (self.horizon * FINE_STEPS_PER_PERIOD as f64).round() as usize
    }

    /// Covariance sampling stride in fine steps (≥ 1).
    pub fn sample_stride(&self) -> usize {
        ((self.time_step * FINE_STEPS_PER_PERIOD as f64).round() as usize).max(1)
    }

    /// Samples per drive period at the configured sampling interval.
    pub fn samples_per_period(&self) -> usize {
        (FINE_STEPS_PER_PERIOD / self.sample_stride()).max(1)
    }

    /// Horizon in natural time units.
    pub fn horizon_time(&self) -> f64 {
        self.horizon * self.drive_period()
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(name: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name}: must be finite, got {v}")))
            }
        }
        for (name, v) in [
            ("theta", self.theta),
            ("g", self.g),
            ("kappa0", self.kappa0),
            ("kappa1", self.kappa1),
            ("delta", self.delta),
            ("cutoff", self.cutoff),
            ("omega1", self.omega1),
            ("time_step", self.time_step),
            ("horizon", self.horizon),
        ] {
            finite(name, v)?;
        }
        if self.theta < 0.0 {
            return Err(Error::Config(format!("theta: must be ≥ 0, got {}", self.theta)));
        }
        if self.g < 0.0 {
            return Err(Error::Config(format!("g: must be ≥ 0, got {}", self.g)));
        }
        if self.cutoff <= 0.0 {
            return Err(Error::Config(format!("cutoff: must be > 0, got {}", self.cutoff)));
        }
        if self.delta <= 0.0 {
            return Err(Error::Config(format!("delta: must be > 0, got {}", self.delta)));
        }
        if !(self.time_step > 0.0 && self.time_step <= 1.0 / 16.0) {
            return Err(Error::Config(format!(
                "time_step: must lie in (0, 1/16], got {}",
                self.time_step
            )));
        }
        if self.horizon <= 0.0 {
            return Err(Error::Config(format!("horizon: must be > 0, got {}", self.horizon)));
        }
        if self.drive_kind == DriveKind::FrequencyModulation && self.kappa1 != 0.0 {
            return Err(Error::Config(
                "kappa1: must be 0 for drive_kind=frequency-modulation (the coupling is static there)"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Set one field from its textual `key=value` form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(key: &str, value: &str) -> Result<f64> {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}' as a number")))
        }
        match key {
            "theta" => self.theta = num(key, value)?,
            "g" => self.g = num(key, value)?,
            "kappa0" => self.kappa0 = num(key, value)?,
            "kappa1" => self.kappa1 = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "cutoff" => self.cutoff = num(key, value)?,
            "omega1" => self.omega1 = num(key, value)?,
            "time_step" => self.time_step = num(key, value)?,
            "horizon" => self.horizon = num(key, value)?,
            "drive_kind" => self.drive_kind = DriveKind::parse(value.trim())?,
            other => {
                return Err(Error::Config(format!("unknown configuration key '{other}'")));
            }
        }
        Ok(())
    }

    /// Parse a flat `key=value` configuration file. Blank lines and lines
    /// starting with `#` are ignored; unknown keys are errors.
    pub fn parse(text: &str) -> Result<SystemConfig> {
        let mut cfg = SystemConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Serialize back to the flat key=value form.
    pub fn to_key_values(&self) -> String {
        let kind = match self.drive_kind {
            DriveKind::CouplingModulation => "coupling-modulation",
            DriveKind::FrequencyModulation => "frequency-modulation",
        };
        format!(
            "theta={}\ng={}\nkappa0={}\nkappa1={}\ndelta={}\ncutoff={}\ndrive_kind={}\nomega1={}\ntime_step={}\nhorizon={}\n",
            self.theta,
            self.g,
            self.kappa0,
            self.kappa1,
            self.delta,
            self.cutoff,
            kind,
            self.omega1,
            self.time_step,
            self.horizon
        )
    }
}
