//! Exact moment propagation per normal mode, lab-frame covariance assembly,
//! entanglement trajectories and steady-state detection.
//!
//! For each normal mode the means propagate with the damped fundamentals
//! (A = f2 − γf1, B = f1) and the variances with their squares plus the
//! inhomogeneous noise terms 2·a_ij. This parameterization contains the
//! t = 0⁺ jump of the factorized initial condition automatically:
//! σxp(0⁺) = −γσ⁰xx + σ⁰xp and σpp(0⁺) = γ²σ⁰xx − 2γσ⁰xp + σ⁰pp.

use nalgebra::{Matrix2, SymmetricEigen};
use rayon::join;
use serde::Serialize;

use crate::config::{Mode, SystemConfig};
use crate::error::{Error, Result};
use crate::floquet::{integrate_fundamentals, FundamentalSolutionSet};
use crate::gaussian::{
    lab_to_normal, log_negativity, normal_to_lab, CovarianceMatrix, EntanglementResult,
    ModeCovariance, MomentVector,
};
use crate::kernel::{InfluenceBuilder, NoiseKernelCache};

/// Covariance Frobenius norm beyond which a run is declared divergent.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Samples closer than this (relative caustic margin) to a caustic are
/// shifted by half a sampling step.
const SAMPLE_CAUSTIC_MARGIN: f64 = 1e-3;

/// Per-mode propagation engine: fundamentals plus precomputed noise
/// integrals, able to evaluate the state at any fine-grid time.
pub struct ModeEngine {
    pub fset: FundamentalSolutionSet,
    pub builder: InfluenceBuilder,
}

impl ModeEngine {
    pub fn new(config: &SystemConfig, mode: Mode, kernel: &NoiseKernelCache) -> Result<Self> {
        let fset = integrate_fundamentals(config, mode)?;
        let builder = InfluenceBuilder::build(&fset, kernel)?;
        Ok(ModeEngine { fset, builder })
    }

    /// Homogeneous propagator (A, B, Ȧ, Ḃ) at a grid index: means map as
    /// (x, p) → (Ax + Bp, Ȧx + Ḃp).
    pub fn propagator(&self, idx: usize) -> (f64, f64, f64, f64) {
        let gam = self.fset.gamma;
        let a = self.fset.f2[idx] - gam * self.fset.f1[idx];
        let ad = self.fset.f2d[idx] - gam * self.fset.f1d[idx];
        (a, self.fset.f1[idx], ad, self.fset.f1d[idx])
    }

    pub fn mean_at(&self, idx: usize, init: &MomentVector) -> MomentVector {
        let (a, b, ad, bd) = self.propagator(idx);
        MomentVector {
            mean_x: a * init.mean_x + b * init.mean_p,
            mean_p: ad * init.mean_x + bd * init.mean_p,
        }
    }

    pub fn cov_at(&self, idx: usize, init: &ModeCovariance) -> Result<ModeCovariance> {
        let (a, b, ad, bd) = self.propagator(idx);
        let (a11, a12, a22) = self.builder.a_coefficients(&self.fset, idx)?;
        let sxx =
            a * a * init.sxx + 2.0 * a * b * init.sxp + b * b * init.spp + 2.0 * b * b * a11;
        let sxp = a * ad * init.sxx
            + (a * bd + b * ad) * init.sxp
            + b * bd * init.spp
            + 2.0 * (b * bd * a11 + b * a12);
        let spp = ad * ad * init.sxx
            + 2.0 * ad * bd * init.sxp
            + bd * bd * init.spp
            + 2.0 * (bd * bd * a11 + 2.0 * bd * a12 + a22);
        Ok(ModeCovariance { mode: self.fset.mode, sxx, sxp, spp })
    }
}

/// Trajectory of one normal mode.
#[derive(Debug, Clone)]
pub struct ModeTrajectory {
    pub mode: Mode,
    pub indices: Vec<usize>,
    pub times: Vec<f64>,
    pub cov: Vec<ModeCovariance>,
    pub means: Vec<MomentVector>,
    pub shifted: Vec<bool>,
    pub diverged_at_period: Option<usize>,
}

/// Full two-oscillator trajectory with per-sample entanglement.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SystemConfig,
    pub times: Vec<f64>,
    pub cov: Vec<CovarianceMatrix>,
    pub entanglement: Vec<EntanglementResult>,
    pub plus: Vec<ModeCovariance>,
    pub minus: Vec<ModeCovariance>,
    pub shifted_samples: usize,
    pub diverged_at_period: Option<usize>,
}

impl Trajectory {
    pub fn nearest_sample(&self, t: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &ti) in self.times.iter().enumerate() {
            let d = (ti - t).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }

    /// √σ_Q1Q1 at the sample nearest to t.
    pub fn position_spread(&self, t: f64) -> f64 {
        self.cov[self.nearest_sample(t)].position_spread()
    }
}

/// Principal-axis decomposition of one mode's phase-space ellipse.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeEllipse {
    pub mode: Mode,
    pub major_variance: f64,
    pub minor_variance: f64,
    /// Orientation of the major axis, radians from the position axis.
    pub angle: f64,
}

pub fn mode_ellipse(cov: &ModeCovariance) -> ModeEllipse {
    let eig = SymmetricEigen::new(cov.as_matrix());
    let (mut major, mut minor) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let mut axis = 0;
    if minor > major {
        std::mem::swap(&mut major, &mut minor);
        axis = 1;
    }
    let v = eig.eigenvectors.column(axis);
    ModeEllipse { mode: cov.mode, major_variance: major, minor_variance: minor, angle: v[1].atan2(v[0]) }
}

/// Squeezing snapshot of both modes at the sample nearest to t.
pub fn mode_squeezing_report(traj: &Trajectory, t: f64) -> (ModeEllipse, ModeEllipse) {
    let i = traj.nearest_sample(t);
    (mode_ellipse(&traj.plus[i]), mode_ellipse(&traj.minus[i]))
}

/// Steady-state analysis of a trajectory by drive-period averaging.
#[derive(Debug, Clone, Serialize)]
pub struct SteadyStateReport {
    pub converged: bool,
    /// Period-averaged E_N over the convergence period (or the last
    /// complete period when not converged).
    pub log_negativity: f64,
    /// Period index at which convergence was declared.
    pub period: usize,
    /// Residual of the converged steady metric (relative change between
    /// consecutive period averages).
    pub residual: f64,
    /// Period-averaged covariance (flattened row-major 4×4) at convergence.
    pub covariance: Option<Vec<f64>>,
    pub diverged_at_period: Option<usize>,
}

/// Plan the sample indices: every `stride` fine steps, shifted by half a
/// sampling step away from caustics of either mode.
fn plan_samples(
    config: &SystemConfig,
    margins: impl Fn(usize) -> f64,
    n: usize,
) -> (Vec<usize>, Vec<bool>) {
    let stride = config.sample_stride();
    let mut indices = Vec::new();
    let mut shifted = Vec::new();
    let mut k = 0usize;
    loop {
        let base = k * stride;
        if base > n {
            break;
        }
        let mut idx = base;
        let mut was_shifted = false;
        if idx > 0 && margins(idx) < SAMPLE_CAUSTIC_MARGIN {
            was_shifted = true;
            idx = base + stride / 2;
            let nudge = (stride / 16).max(1);
            let mut tries = 0;
            while idx <= n && margins(idx) < SAMPLE_CAUSTIC_MARGIN && tries < 16 {
                idx += nudge;
                tries += 1;
            }
        }
        if idx <= n && (idx == 0 || margins(idx) >= SAMPLE_CAUSTIC_MARGIN) {
            indices.push(idx);
            shifted.push(was_shifted);
        }
        k += 1;
    }
    (indices, shifted)
}

/// Evolve a single normal mode from the given initial moments.
pub fn evolve_mode(
    config: &SystemConfig,
    mode: Mode,
    init_cov: &ModeCovariance,
    init_mean: &MomentVector,
) -> Result<ModeTrajectory> {
    config.validate()?;
    if init_cov.sxx <= 0.0 || init_cov.spp <= 0.0 || init_cov.uncertainty_margin() < -1e-9 {
        return Err(Error::Domain(format!(
            "initial mode covariance unphysical: sxx={}, sxp={}, spp={}",
            init_cov.sxx, init_cov.sxp, init_cov.spp
        )));
    }
    let kernel = NoiseKernelCache::build(
        config.theta,
        config.g,
        config.cutoff,
        config.fine_step(),
        config.fine_steps(),
    )?;
    let engine = ModeEngine::new(config, mode, &kernel)?;
    let n = engine.fset.len() - 1;
    let (indices, shifted) = plan_samples(config, |i| engine.fset.caustic_margin(i), n);

    let mut traj = ModeTrajectory {
        mode,
        indices: Vec::new(),
        times: Vec::new(),
        cov: Vec::new(),
        means: Vec::new(),
        shifted: Vec::new(),
        diverged_at_period: None,
    };
    let td = config.drive_period();
    for (pos, &idx) in indices.iter().enumerate() {
        let cov = engine.cov_at(idx, init_cov)?;
        let norm = cov.sxx.abs().max(cov.spp.abs());
        if norm > DIVERGENCE_GUARD {
            traj.diverged_at_period = Some((engine.fset.time(idx) / td) as usize);
            break;
        }
        traj.indices.push(idx);
        traj.times.push(engine.fset.time(idx));
        traj.cov.push(cov);
        traj.means.push(engine.mean_at(idx, init_mean));
        traj.shifted.push(shifted[pos]);
    }
    Ok(traj)
}

/// Internal steady-detection state shared by `evolve_full` (early stop) and
/// `steady_state` (post-hoc analysis).
struct SteadyScan {
    tol: f64,
    window: usize,
    /// (E_N avg, avg per-sample min cov eigenvalue, cov avg) per period
    period_en: Vec<f64>,
    period_smin: Vec<f64>,
    period_cov: Vec<nalgebra::Matrix4<f64>>,
    cov_residual: Vec<f64>,
    metric_residual: Vec<f64>,
}

impl SteadyScan {
    fn new(tol: f64, window: usize) -> Self {
        SteadyScan {
            tol,
            window,
            period_en: Vec::new(),
            period_smin: Vec::new(),
            period_cov: Vec::new(),
            cov_residual: Vec::new(),
            metric_residual: Vec::new(),
        }
    }

    /// `smin` is the per-period average of the smallest covariance
    /// eigenvalue of the individual samples (the squeezed variance), which
    /// stays bounded even when the drive is unstable; the eigenvalue of the
    /// period-averaged matrix would not, since the squeezing axis rotates.
    fn push_period(&mut self, en: f64, smin: f64, cov: nalgebra::Matrix4<f64>) {
        if let Some(prev) = self.period_cov.last() {
            let dcov = (cov - prev).norm() / cov.norm().max(1e-300);
            let den = (en - self.period_en.last().unwrap()).abs() / en.abs().max(0.01);
            let dsmin =
                (smin - self.period_smin.last().unwrap()).abs() / smin.abs().max(1e-300);
            self.cov_residual.push(dcov);
            self.metric_residual.push(den.max(dsmin));
        }
        self.period_en.push(en);
        self.period_smin.push(smin);
        self.period_cov.push(cov);
    }

    /// A residual series counts as converged when the last `window` values
    /// sit below tolerance AND the geometric tail they extrapolate to is
    /// also below tolerance. The extrapolation matters for weak damping:
    /// per-period changes shrink like e^{−γ·T_d} long before the remaining
    /// drift is negligible.
    fn series_converged(tail: &[f64], tol: f64) -> bool {
        if tail.iter().any(|&r| !(r < tol)) {
            return false;
        }
        let r_last = *tail.last().unwrap();
        if r_last < 0.1 * tol {
            return true;
        }
        let r_first = tail[0];
        if r_first <= 0.0 {
            return true;
        }
        let span = (tail.len() - 1).max(1) as f64;
        let q = (r_last / r_first).powf(1.0 / span);
        q < 1.0 && r_last * q / (1.0 - q) < tol
    }

    /// Convergence at period p (0-based) requires `window` consecutive
    /// residuals below tolerance: either of the full covariance (true
    /// equilibrium) or of the bounded steady metric (E_N and the squeezed
    /// variance), which is what settles when the drive is unstable.
    fn converged_at(&self) -> Option<(usize, f64)> {
        let w = self.window.max(1);
        let n = self.cov_residual.len();
        if n < w {
            return None;
        }
        for series in [&self.cov_residual, &self.metric_residual] {
            let tail = &series[n - w..];
            if Self::series_converged(tail, self.tol) {
                return Some((self.period_cov.len() - 1, *tail.last().unwrap()));
            }
        }
        None
    }

    fn report(&self, diverged: Option<usize>) -> SteadyStateReport {
        match self.converged_at() {
            Some((p, residual)) => SteadyStateReport {
                converged: true,
                log_negativity: self.period_en[p],
                period: p,
                residual,
                covariance: Some(self.period_cov[p].iter().cloned().collect()),
                diverged_at_period: diverged,
            },
            None => {
                let p = self.period_cov.len().saturating_sub(1);
                SteadyStateReport {
                    converged: false,
                    log_negativity: self.period_en.last().copied().unwrap_or(0.0),
                    period: p,
                    residual: self
                        .metric_residual
                        .last()
                        .copied()
                        .unwrap_or(f64::INFINITY),
                    covariance: self.period_cov.last().map(|c| c.iter().cloned().collect()),
                    diverged_at_period: diverged,
                }
            }
        }
    }
}

/// Time-weighted running average over one drive period of the quantities
/// `SteadyScan` tracks. A plain sample mean will not do: the drive period
/// is generally incommensurate with the sampling stride, so bins would
/// alternate between n and n+1 samples and the averages would jump by
/// ~stride/period even in a perfectly periodic steady state. Trapezoid
/// integration with linear interpolation at the period boundaries removes
/// that aliasing.
struct PeriodAccumulator {
    td: f64,
    period: usize,
    prev: Option<(f64, f64, f64, nalgebra::Matrix4<f64>)>,
    span: f64,
    en_int: f64,
    smin_int: f64,
    cov_int: nalgebra::Matrix4<f64>,
}

impl PeriodAccumulator {
    fn new(td: f64) -> Self {
        PeriodAccumulator {
            td,
            period: 0,
            prev: None,
            span: 0.0,
            en_int: 0.0,
            smin_int: 0.0,
            cov_int: nalgebra::Matrix4::zeros(),
        }
    }

    fn add_segment(
        &mut self,
        dt: f64,
        a: (f64, f64, &nalgebra::Matrix4<f64>),
        b: (f64, f64, &nalgebra::Matrix4<f64>),
    ) {
        self.span += dt;
        self.en_int += 0.5 * dt * (a.0 + b.0);
        self.smin_int += 0.5 * dt * (a.1 + b.1);
        self.cov_int += 0.5 * dt * (a.2 + b.2);
    }

    /// Feed one sample; completed periods are pushed into `scan`.
    fn push(&mut self, t: f64, en: f64, cov: &nalgebra::Matrix4<f64>, scan: &mut SteadyScan) {
        let smin = nalgebra::SymmetricEigen::new(*cov).eigenvalues.min();
        match self.prev.take() {
            None => self.period = (t / self.td) as usize,
            Some((mut tp, mut ep, mut sp, mut cp)) => {
                // close out any period boundaries crossed between tp and t
                loop {
                    let tb = (self.period + 1) as f64 * self.td;
                    if t <= tb {
                        break;
                    }
                    let w = (tb - tp) / (t - tp);
                    let eb = ep + w * (en - ep);
                    let sb = sp + w * (smin - sp);
                    let cb = cp + w * (cov - cp);
                    self.add_segment(tb - tp, (ep, sp, &cp), (eb, sb, &cb));
                    if self.span > 0.0 {
                        scan.push_period(
                            self.en_int / self.span,
                            self.smin_int / self.span,
                            self.cov_int / self.span,
                        );
                    }
                    self.span = 0.0;
                    self.en_int = 0.0;
                    self.smin_int = 0.0;
                    self.cov_int = nalgebra::Matrix4::zeros();
                    self.period += 1;
                    (tp, ep, sp, cp) = (tb, eb, sb, cb);
                }
                self.add_segment(t - tp, (ep, sp, &cp), (en, smin, cov));
            }
        }
        self.prev = Some((t, en, smin, *cov));
    }
}

fn evolve_full_inner(
    config: &SystemConfig,
    initial: &CovarianceMatrix,
    early_stop: Option<(f64, usize)>,
) -> Result<Trajectory> {
    config.validate()?;
    let (init_p, init_m, cross0) = lab_to_normal(initial);

    let kernel = NoiseKernelCache::build(
        config.theta,
        config.g,
        config.cutoff,
        config.fine_step(),
        config.fine_steps(),
    )?;
    let (ep, em) = join(
        || ModeEngine::new(config, Mode::Plus, &kernel),
        || ModeEngine::new(config, Mode::Minus, &kernel),
    );
    let (ep, em) = (ep?, em?);

    let n = ep.fset.len() - 1;
    let (indices, shifted) = plan_samples(
        config,
        |i| ep.fset.caustic_margin(i).min(em.fset.caustic_margin(i)),
        n,
    );

    let mut traj = Trajectory {
        config: config.clone(),
        times: Vec::new(),
        cov: Vec::new(),
        entanglement: Vec::new(),
        plus: Vec::new(),
        minus: Vec::new(),
        shifted_samples: shifted.iter().filter(|&&s| s).count(),
        diverged_at_period: None,
    };

    let td = config.drive_period();
    let mut scan = early_stop.map(|(tol, window)| SteadyScan::new(tol, window));
    let mut period_acc = PeriodAccumulator::new(td);

    for &idx in indices.iter() {
        let cp = ep.cov_at(idx, &init_p)?;
        let cm = em.cov_at(idx, &init_m)?;
        // cross-block evolves homogeneously (independent baths add no
        // cross-mode noise)
        let (ap, bp, adp, bdp) = ep.propagator(idx);
        let (am, bm, adm, bdm) = em.propagator(idx);
        let lp = Matrix2::new(ap, bp, adp, bdp);
        let lm = Matrix2::new(am, bm, adm, bdm);
        let cross = lp * cross0 * lm.transpose();
        let cov = normal_to_lab(&cp, &cm, &cross);

        let norm = cov.frobenius_norm();
        if norm > DIVERGENCE_GUARD {
            traj.diverged_at_period = Some((ep.fset.time(idx) / td) as usize);
            break;
        }
        let t = ep.fset.time(idx);
        let ent = log_negativity(&cov)?;

        if let Some(scan) = scan.as_mut() {
            period_acc.push(t, ent.log_negativity, cov.matrix(), scan);
        }

        traj.times.push(t);
        traj.cov.push(cov);
        traj.entanglement.push(ent);
        traj.plus.push(cp);
        traj.minus.push(cm);

        if let Some(scan) = scan.as_ref() {
            if scan.converged_at().is_some() {
                break;
            }
        }
    }
    Ok(traj)
}

/// Evolve the full two-oscillator system over the configured horizon.
pub fn evolve_full(config: &SystemConfig, initial: &CovarianceMatrix) -> Result<Trajectory> {
    evolve_full_inner(config, initial, None)
}

/// Evolve with early stopping: sampling ends as soon as the steady state is
/// detected (tolerance/window as in `steady_state`). Useful in scans where
/// late-time covariance growth would only degrade the arithmetic.
pub fn evolve_until_steady(
    config: &SystemConfig,
    initial: &CovarianceMatrix,
    tolerance: f64,
    window: usize,
) -> Result<(Trajectory, SteadyStateReport)> {
    let traj = evolve_full_inner(config, initial, Some((tolerance, window)))?;
    let report = steady_state(&traj, tolerance, window);
    Ok((traj, report))
}

/// Period-averaged steady-state detection on a stored trajectory.
pub fn steady_state(traj: &Trajectory, tolerance: f64, window: usize) -> SteadyStateReport {
    let td = traj.config.drive_period();
    let mut scan = SteadyScan::new(tolerance, window);
    let mut acc = PeriodAccumulator::new(td);
    for (i, &t) in traj.times.iter().enumerate() {
        acc.push(t, traj.entanglement[i].log_negativity, traj.cov[i].matrix(), &mut scan);
        if scan.converged_at().is_some() {
            break;
        }
    }
    scan.report(traj.diverged_at_period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(theta: f64, g: f64, kappa1: f64, delta: f64, horizon: f64) -> SystemConfig {
        SystemConfig { theta, g, kappa1, delta, horizon, ..SystemConfig::default() }
    }

    #[test]
    fn free_oscillator_vacuum_is_stationary() {
        let c = cfg(0.0, 0.0, 0.0, 2.0, 4.0);
        let vac = CovarianceMatrix::thermal_product(0.0).unwrap();
        let traj = evolve_full(&c, &vac).unwrap();
        for cov in &traj.cov {
            for i in 0..4 {
                assert_relative_eq!(cov.matrix()[(i, i)], 0.5, epsilon = 1e-7);
            }
            assert_relative_eq!(cov.purity(), 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn undriven_damped_thermal_is_stationary() {
        let c = cfg(1.0, 0.01, 0.0, 2.0, 80.0);
        let init = CovarianceMatrix::thermal_product(1.0).unwrap();
        let traj = evolve_full(&c, &init).unwrap();
        let report = steady_state(&traj, 1e-3, 3);
        assert!(report.converged);
        let eq = 0.5 / (0.5f64).tanh();
        let last = traj.cov.last().unwrap();
        assert_relative_eq!(last.matrix()[(0, 0)], eq, max_relative = 0.02);
        assert_relative_eq!(last.matrix()[(2, 2)], eq, max_relative = 0.02);
    }

    #[test]
    fn undamped_driving_preserves_purity() {
        // g=0, κ1=0.5: pure squeezing, det of each mode covariance fixed at 1/4
        let c = cfg(0.0, 0.0, 0.5, 1.996, 10.0);
        let vac = CovarianceMatrix::thermal_product(0.0).unwrap();
        let traj = evolve_full(&c, &vac).unwrap();
        for mc in &traj.plus {
            let det = mc.sxx * mc.spp - mc.sxp * mc.sxp;
            assert!((det - 0.25).abs() < 1e-6, "det drift {}", det - 0.25);
        }
    }

    #[test]
    fn static_gibbs_state_entanglement_constant() {
        let mut c = cfg(0.2, 0.0, 0.0, 2.0, 6.0);
        c.kappa0 = 0.5;
        let init = CovarianceMatrix::gibbs(0.2, 0.5).unwrap();
        let traj = evolve_full(&c, &init).unwrap();
        let e0 = traj.entanglement[0].log_negativity;
        assert!(e0 > 0.0);
        for e in &traj.entanglement {
            assert!((e.log_negativity - e0).abs() < 1e-6);
        }
    }

    #[test]
    fn undamped_parametric_resonance_diverges() {
        let c = cfg(1.0, 0.0, 0.5, 1.996, 60.0);
        let init = CovarianceMatrix::thermal_product(1.0).unwrap();
        let traj = evolve_full(&c, &init).unwrap();
        assert!(traj.diverged_at_period.is_some());
        let report = steady_state(&traj, 1e-3, 10);
        assert!(!report.converged);
        assert!(report.diverged_at_period.is_some());
    }

    #[test]
    fn caustic_samples_are_shifted_not_fatal() {
        // undriven g=0: f1 = sin t has zeros on the sampling grid for δ=2
        let c = cfg(1.0, 0.0, 0.0, 2.0, 4.0);
        let init = CovarianceMatrix::thermal_product(1.0).unwrap();
        let traj = evolve_full(&c, &init).unwrap();
        assert!(traj.shifted_samples > 0);
        let mut last = -1.0;
        for &t in &traj.times {
            assert!(t > last, "sample times strictly increasing");
            last = t;
        }
    }

    #[test]
    fn evolve_mode_jump_at_zero_plus() {
        // t=0⁺: σxp → −γσ⁰xx + σ⁰xp, σpp → γ²σ⁰xx − 2γσ⁰xp + σ⁰pp
        let c = cfg(1.0, 0.1, 0.0, 2.0, 2.0);
        let init = ModeCovariance { mode: Mode::Plus, sxx: 1.0, sxp: 0.3, spp: 1.2 };
        let traj = evolve_mode(&c, Mode::Plus, &init, &MomentVector::zero()).unwrap();
        // first nonzero sample sits ~T_d/32 after the jump; compare loosely
        let s = &traj.cov[1];
        let jump_xp = -c.g * init.sxx + init.sxp;
        let jump_pp = c.g * c.g * init.sxx - 2.0 * c.g * init.sxp + init.spp;
        assert!((s.sxp - jump_xp).abs() < 0.15 * (init.sxp - jump_xp).abs().max(0.05));
        assert!((s.spp - jump_pp).abs() < 0.1);
        assert!((s.sxp - init.sxp).abs() > 0.3 * (init.sxp - jump_xp).abs());
    }

    #[test]
    fn physicality_along_driven_trajectory() {
        let c = cfg(10.0, 0.01, 0.5, 1.996, 8.0);
        let init = CovarianceMatrix::thermal_product(10.0).unwrap();
        let traj = evolve_full(&c, &init).unwrap();
        for cov in &traj.cov {
            let margin = cov.heisenberg_margin();
            assert!(margin > -1e-6 * cov.frobenius_norm().max(1.0), "margin {margin}");
        }
    }

    #[test]
    fn squeezing_report_and_spread() {
        let vac = CovarianceMatrix::thermal_product(0.0).unwrap();
        let c = cfg(0.0, 0.0, 0.0, 2.0, 2.0);
        let traj = evolve_full(&c, &vac).unwrap();
        let (p, m) = mode_squeezing_report(&traj, 1.0);
        assert_relative_eq!(p.major_variance, 0.5, epsilon = 1e-6);
        assert_relative_eq!(m.minor_variance, 0.5, epsilon = 1e-6);
        assert_relative_eq!(traj.position_spread(1.0), (0.5f64).sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn tmsv_mode_ellipse_ratio() {
        let r = 1.0;
        let cov = CovarianceMatrix::two_mode_squeezed(r);
        let (p, m, _) = lab_to_normal(&cov);
        let ep = mode_ellipse(&p);
        let em = mode_ellipse(&m);
        // conjugate quadratures of the two modes differ by e^{±4r}
        assert_relative_eq!(ep.major_variance / em.minor_variance, (4.0 * r).exp(), max_relative = 1e-9);
    }
}
