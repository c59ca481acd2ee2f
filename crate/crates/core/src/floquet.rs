//! Fundamental solutions of the driven (anti-)damped oscillator equations
//! per normal mode, two-point boundary solutions, and Floquet/monodromy
//! stability analysis of the undamped equation.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Mode, SystemConfig, FINE_STEPS_PER_PERIOD};
use crate::error::{Error, Result};
use crate::integrate::integrate_grid;

/// Time-dependent squared frequency Ω±²(t) of a normal mode.
pub fn omega_sq(config: &SystemConfig, mode: Mode, t: f64) -> f64 {
    match config.drive_kind {
        crate::config::DriveKind::CouplingModulation => {
            1.0 + mode.sign() * (config.kappa0 + config.kappa1 * (config.delta * t).cos())
        }
        crate::config::DriveKind::FrequencyModulation => {
            let w = 1.0 + config.omega1 * (config.delta * t).sin();
            w * w + mode.sign() * config.kappa0
        }
    }
}

/// Fundamental solutions sampled on the uniform fine grid.
///
/// f1, f2 solve ẍ + γẋ + Ω²(t)x = 0 and g1, g2 solve ẍ − γẋ + Ω²(t)x = 0,
/// all with the canonical initial data f1(0)=0, ḟ1(0)=1, f2(0)=1, ḟ2(0)=0.
#[derive(Debug, Clone)]
pub struct FundamentalSolutionSet {
    pub mode: Mode,
    pub gamma: f64,
    /// Fine grid step; sample k corresponds to t = k·h.
    pub h: f64,
    pub f1: Vec<f64>,
    pub f1d: Vec<f64>,
    pub f2: Vec<f64>,
    pub f2d: Vec<f64>,
    pub g1: Vec<f64>,
    pub g1d: Vec<f64>,
    pub g2: Vec<f64>,
    pub g2d: Vec<f64>,
}

/// Two-point boundary solutions at a fixed final time t, sampled over
/// s ∈ [0, t] on the fine grid, together with their endpoint s-derivatives.
///
/// v1(t,0)=1, v1(t,t)=0, v2(t,0)=0, v2(t,t)=1 (anti-damped equation);
/// u1, u2 satisfy the same boundary data for the damped equation.
#[derive(Debug, Clone)]
pub struct BoundarySolutions {
    pub t_index: usize,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub du1_0: f64,
    pub du1_t: f64,
    pub du2_0: f64,
    pub du2_t: f64,
    pub dv1_0: f64,
    pub dv1_t: f64,
    pub dv2_0: f64,
    pub dv2_t: f64,
}

/// Mathieu/Floquet characteristic data of the undamped normal-mode equation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FloquetExponent {
    pub mode: Mode,
    /// Characteristic exponent, Im μ ≥ 0 branch; x(t) = e^{iμt}φ(t).
    pub mu_re: f64,
    pub mu_im: f64,
    /// max(0, ln ρ(M)/T_d): the parametric squeezing production rate.
    pub growth_rate: f64,
    pub stable: bool,
}

impl FundamentalSolutionSet {
    /// Number of grid samples (indices 0..len-1).
    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    pub fn time(&self, idx: usize) -> f64 {
        idx as f64 * self.h
    }

    /// |f1| relative to the local solution envelope; small values flag a
    /// caustic of the two-point boundary problem.
    pub fn caustic_margin(&self, idx: usize) -> f64 {
        let env = (self.f1[idx].powi(2) + self.f1d[idx].powi(2)).sqrt();
        if env == 0.0 {
            0.0
        } else {
            self.f1[idx].abs() / env
        }
    }

    /// Largest relative drift of the Wronskian invariants
    /// e^{±γt}(x1ẋ2 − x2ẋ1) = −1 over the grid (damped and anti-damped
    /// family). Relative to the product scale, so that for exponentially
    /// grown solutions only genuine integration error is measured, not the
    /// unavoidable cancellation noise of the two huge products.
    pub fn wronskian_drift(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.len() {
            let t = self.time(k);
            let ef = (self.gamma * t).exp();
            let wf = ef * (self.f1[k] * self.f2d[k] - self.f2[k] * self.f1d[k]);
            let sf = 1.0f64.max(ef * (self.f1[k] * self.f2d[k]).abs());
            let eg = (-self.gamma * t).exp();
            let wg = eg * (self.g1[k] * self.g2d[k] - self.g2[k] * self.g1d[k]);
            let sg = 1.0f64.max(eg * (self.g1[k] * self.g2d[k]).abs());
            worst = worst.max((wf + 1.0).abs() / sf).max((wg + 1.0).abs() / sg);
        }
        worst
    }
}

/// Integrate the damped and anti-damped fundamental pairs of one normal
/// mode over the full fine grid.
pub fn integrate_fundamentals(config: &SystemConfig, mode: Mode) -> Result<FundamentalSolutionSet> {
    config.validate()?;
    if config.horizon < 1.0 {
        return Err(Error::Config(format!(
            "horizon: need at least one drive period for fundamental solutions, got {}",
            config.horizon
        )));
    }
    let h = config.fine_step();
    let n = config.fine_steps();

    let make = |gamma: f64| -> Result<Vec<[f64; 4]>> {
        let cfg = config.clone();
        let rhs = move |t: f64, y: &[f64; 4]| {
            let om2 = omega_sq(&cfg, mode, t);
            [y[1], -gamma * y[1] - om2 * y[0], y[3], -gamma * y[3] - om2 * y[2]]
        };
        integrate_grid(&rhs, [0.0, 1.0, 1.0, 0.0], h, n)
    };

    let damped = make(config.g)?;
    let anti = make(-config.g)?;

    let pick = |sol: &[[f64; 4]], i: usize| sol.iter().map(|y| y[i]).collect::<Vec<f64>>();
    let set = FundamentalSolutionSet {
        mode,
        gamma: config.g,
        h,
        f1: pick(&damped, 0),
        f1d: pick(&damped, 1),
        f2: pick(&damped, 2),
        f2d: pick(&damped, 3),
        g1: pick(&anti, 0),
        g1d: pick(&anti, 1),
        g2: pick(&anti, 2),
        g2d: pick(&anti, 3),
    };

    let drift = set.wronskian_drift();
    if drift > 1e-8 {
        return Err(Error::Integration {
            t: config.horizon_time(),
            msg: format!("Wronskian drift {drift:.3e} exceeds 1e-8"),
        });
    }
    Ok(set)
}

/// Assemble the two-point boundary solutions at grid index `t_index`.
pub fn boundary_solutions(fset: &FundamentalSolutionSet, t_index: usize) -> Result<BoundarySolutions> {
    if t_index == 0 || t_index >= fset.len() {
        return Err(Error::Domain(format!(
            "boundary_solutions: t index {t_index} outside (0, {})",
            fset.len()
        )));
    }
    if fset.caustic_margin(t_index) < 1e-8 {
        return Err(Error::Caustic { t: fset.time(t_index) });
    }
    let rf = fset.f2[t_index] / fset.f1[t_index];
    let rg = fset.g2[t_index] / fset.g1[t_index];
    let m = t_index + 1;
    let mut u1 = Vec::with_capacity(m);
    let mut u2 = Vec::with_capacity(m);
    let mut v1 = Vec::with_capacity(m);
    let mut v2 = Vec::with_capacity(m);
    for s in 0..m {
        u1.push(fset.f2[s] - rf * fset.f1[s]);
        u2.push(fset.f1[s] / fset.f1[t_index]);
        v1.push(fset.g2[s] - rg * fset.g1[s]);
        v2.push(fset.g1[s] / fset.g1[t_index]);
    }
    Ok(BoundarySolutions {
        t_index,
        u1,
        u2,
        v1,
        v2,
        du1_0: -rf,
        du1_t: fset.f2d[t_index] - rf * fset.f1d[t_index],
        du2_0: 1.0 / fset.f1[t_index],
        du2_t: fset.f1d[t_index] / fset.f1[t_index],
        dv1_0: -rg,
        dv1_t: fset.g2d[t_index] - rg * fset.g1d[t_index],
        dv2_0: 1.0 / fset.g1[t_index],
        dv2_t: fset.g1d[t_index] / fset.g1[t_index],
    })
}

/// Monodromy matrix of the undamped equation ẍ + Ω±²(t)x = 0 over one
/// drive period, columns = flow of the canonical basis.
pub fn monodromy(config: &SystemConfig, mode: Mode) -> Result<[[f64; 2]; 2]> {
    config.validate()?;
    let td = config.drive_period();
    let h = td / FINE_STEPS_PER_PERIOD as f64;
    let cfg = config.clone();
    let rhs = move |t: f64, y: &[f64; 4]| {
        let om2 = omega_sq(&cfg, mode, t);
        [y[1], -om2 * y[0], y[3], -om2 * y[2]]
    };
    // columns: (x, ẋ) starting from (1,0) and (0,1)
    let sol = integrate_grid(&rhs, [1.0, 0.0, 0.0, 1.0], h, FINE_STEPS_PER_PERIOD)?;
    let y = sol[sol.len() - 1];
    Ok([[y[0], y[2]], [y[1], y[3]]])
}

/// Characteristic exponent and growth rate from the monodromy spectrum.
pub fn floquet_exponent(config: &SystemConfig, mode: Mode) -> Result<FloquetExponent> {
    let m = monodromy(config, mode)?;
    let td = config.drive_period();
    let tr = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = Complex64::new(tr * tr - det, 0.0).sqrt();
    let l1 = Complex64::new(tr, 0.0) + disc;
    let l2 = Complex64::new(tr, 0.0) - disc;
    let rho = l1.norm().max(l2.norm());
    let growth = if rho > 1.0 { rho.ln() / td } else { 0.0 };
    // λ = e^{iμT_d}; the eigenvalue inside the unit circle carries the
    // Im μ ≥ 0 branch
    let l_small = if l1.norm() <= l2.norm() { l1 } else { l2 };
    let mu = Complex64::new(0.0, -1.0) * l_small.ln() / td;
    Ok(FloquetExponent {
        mode,
        mu_re: mu.re,
        mu_im: mu.im.max(0.0),
        growth_rate: growth,
        stable: rho <= 1.0 + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DriveKind;
    use approx::assert_relative_eq;

    fn cfg(kappa1: f64, delta: f64, g: f64, horizon: f64) -> SystemConfig {
        SystemConfig { kappa1, delta, g, horizon, theta: 1.0, ..SystemConfig::default() }
    }

    #[test]
    fn omega_sq_values() {
        let c = cfg(0.0, 2.0, 0.0, 1.0);
        assert_eq!(omega_sq(&c, Mode::Plus, 0.3), 1.0);
        assert_eq!(omega_sq(&c, Mode::Minus, 1.7), 1.0);

        let c = cfg(0.5, 2.0, 0.0, 1.0);
        assert_relative_eq!(omega_sq(&c, Mode::Plus, 0.0), 1.5, max_relative = 1e-15);

        let mut c = cfg(0.0, 2.0, 0.0, 1.0);
        c.drive_kind = DriveKind::FrequencyModulation;
        c.omega1 = 0.1;
        c.kappa0 = 0.047;
        let t = std::f64::consts::FRAC_PI_2 / c.delta; // ω_d t = π/2
        assert_relative_eq!(omega_sq(&c, Mode::Minus, t), 1.1f64 * 1.1 - 0.047, max_relative = 1e-12);
    }

    #[test]
    fn undriven_fundamentals_match_closed_form() {
        let c = cfg(0.0, 2.0, 0.0, 2.0);
        let fs = integrate_fundamentals(&c, Mode::Plus).unwrap();
        for k in (0..fs.len()).step_by(97) {
            let t = fs.time(k);
            assert!((fs.f1[k] - t.sin()).abs() < 1e-8);
            assert!((fs.f2[k] - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn damped_fundamentals_match_closed_form() {
        let g = 0.1;
        let c = cfg(0.0, 2.0, g, 3.0);
        let fs = integrate_fundamentals(&c, Mode::Minus).unwrap();
        let nu = (1.0 - g * g / 4.0).sqrt();
        for k in (0..fs.len()).step_by(131) {
            let t = fs.time(k);
            let f1 = (-0.5 * g * t).exp() * (nu * t).sin() / nu;
            let f2 = (-0.5 * g * t).exp() * ((nu * t).cos() + 0.5 * g * (nu * t).sin() / nu);
            assert!((fs.f1[k] - f1).abs() < 1e-8, "f1 err at t={t}");
            assert!((fs.f2[k] - f2).abs() < 1e-8, "f2 err at t={t}");
        }
        // anti-damped identities g1 = e^{γs} f1, g2 = e^{γs}(f2 − γ f1)
        for k in (0..fs.len()).step_by(131) {
            let t = fs.time(k);
            let e = (g * t).exp();
            assert!((fs.g1[k] - e * fs.f1[k]).abs() < 1e-7);
            assert!((fs.g2[k] - e * (fs.f2[k] - g * fs.f1[k])).abs() < 1e-7);
        }
    }

    #[test]
    fn growth_rate_matches_direct_fit() {
        // principal-tongue growth measured from ‖(f1, ḟ1)‖ over ≥ 100 periods
        let c = cfg(0.5, 1.996, 0.0, 110.0);
        let fs = integrate_fundamentals(&c, Mode::Plus).unwrap();
        let fe = floquet_exponent(&c, Mode::Plus).unwrap();
        assert!(fe.growth_rate > 0.0);
        let td = c.drive_period();
        let idx = |p: f64| ((p * td / fs.h).round() as usize).min(fs.len() - 1);
        let (i0, i1) = (idx(5.0), idx(105.0));
        let n0 = (fs.f1[i0].powi(2) + fs.f1d[i0].powi(2)).sqrt();
        let n1 = (fs.f1[i1].powi(2) + fs.f1d[i1].powi(2)).sqrt();
        let fitted = (n1 / n0).ln() / (fs.time(i1) - fs.time(i0));
        assert_relative_eq!(fitted, fe.growth_rate, max_relative = 0.02);
    }

    #[test]
    fn monodromy_det_is_one() {
        for (k1, d) in [(0.5, 1.996), (0.2, 1.9996), (0.05, 3.0)] {
            let m = monodromy(&cfg(k1, d, 0.0, 1.0), Mode::Plus).unwrap();
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            assert_relative_eq!(det, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn stability_classification() {
        let fe = floquet_exponent(&cfg(0.0, 2.0, 0.0, 1.0), Mode::Plus).unwrap();
        assert!(fe.stable);
        assert_eq!(fe.growth_rate, 0.0);

        let fe = floquet_exponent(&cfg(0.5, 1.996, 0.0, 1.0), Mode::Plus).unwrap();
        assert!(!fe.stable);
        assert!(fe.growth_rate > 0.1 && fe.growth_rate < 0.15);
        assert_relative_eq!(fe.mu_im, fe.growth_rate, max_relative = 1e-12);

        let fe = floquet_exponent(&cfg(0.05, 3.0, 0.0, 1.0), Mode::Plus).unwrap();
        assert!(fe.stable, "outside the principal resonance tongue");
    }

    #[test]
    fn growth_symmetric_under_mode_exchange() {
        for (k1, d) in [(0.5, 1.996), (0.2, 1.9996)] {
            let gp = floquet_exponent(&cfg(k1, d, 0.0, 1.0), Mode::Plus).unwrap().growth_rate;
            let gm = floquet_exponent(&cfg(k1, d, 0.0, 1.0), Mode::Minus).unwrap().growth_rate;
            assert_relative_eq!(gp, gm, max_relative = 1e-6);
            // − mode with flipped drive sign sees the + mode's equation
            let gm2 = floquet_exponent(&cfg(-k1, d, 0.0, 1.0), Mode::Minus).unwrap().growth_rate;
            assert_relative_eq!(gp, gm2, max_relative = 1e-12);
        }
    }

    #[test]
    fn boundary_values_reproduced() {
        let c = cfg(0.2, 1.9996, 0.001, 12.0);
        let fs = integrate_fundamentals(&c, Mode::Plus).unwrap();
        let mut idx = (10.0 * c.drive_period() / fs.h).round() as usize;
        while fs.caustic_margin(idx) < 1e-3 {
            idx += 7;
        }
        let b = boundary_solutions(&fs, idx).unwrap();
        assert!((b.u1[0] - 1.0).abs() < 1e-9);
        assert!(b.u1[idx].abs() < 1e-9);
        assert!(b.u2[0].abs() < 1e-9);
        assert!((b.u2[idx] - 1.0).abs() < 1e-9);
        assert!((b.v1[0] - 1.0).abs() < 1e-9);
        assert!(b.v1[idx].abs() < 1e-9);
    }

    #[test]
    fn boundary_solutions_match_reintegration() {
        // integrate the damped equation from the boundary initial data and
        // compare against the assembled u1 over the whole s-range
        let c = cfg(0.2, 1.9996, 0.001, 12.0);
        let fs = integrate_fundamentals(&c, Mode::Plus).unwrap();
        let mut idx = (10.0 * c.drive_period() / fs.h).round() as usize;
        while fs.caustic_margin(idx) < 1e-3 {
            idx += 7;
        }
        let b = boundary_solutions(&fs, idx).unwrap();
        let cfg2 = c.clone();
        let gam = c.g;
        let rhs = move |t: f64, y: &[f64; 2]| {
            [y[1], -gam * y[1] - omega_sq(&cfg2, Mode::Plus, t) * y[0]]
        };
        let sol = integrate_grid(&rhs, [1.0, b.du1_0], fs.h, idx).unwrap();
        let mut worst = 0.0f64;
        for (s, y) in sol.iter().enumerate() {
            worst = worst.max((y[0] - b.u1[s]).abs());
        }
        assert!(worst < 1e-7, "max deviation {worst}");
    }

    #[test]
    fn undriven_half_period_boundary() {
        // κ1=0, g=0, t=π/2: v1 = cos s, v2 = sin s
        let mut c = cfg(0.0, 2.0, 0.0, 2.0);
        c.delta = 2.0;
        let fs = integrate_fundamentals(&c, Mode::Plus).unwrap();
        let idx = (std::f64::consts::FRAC_PI_2 / fs.h).round() as usize;
        let b = boundary_solutions(&fs, idx).unwrap();
        for s in (0..=idx).step_by(50) {
            let t = fs.time(s);
            assert!((b.v1[s] - t.cos()).abs() < 1e-7);
            assert!((b.v2[s] - t.sin()).abs() < 1e-7);
        }
    }

    #[test]
    fn caustic_is_reported() {
        let c = cfg(0.0, 2.0, 0.0, 2.0);
        let fs = integrate_fundamentals(&c, Mode::Plus).unwrap();
        let idx = (std::f64::consts::PI / fs.h).round() as usize; // f1 = sin t vanishes at π
        match boundary_solutions(&fs, idx) {
            Err(Error::Caustic { t }) => assert!((t - std::f64::consts::PI).abs() < 1e-2),
            other => panic!("expected caustic error, got {other:?}"),
        }
    }
}
