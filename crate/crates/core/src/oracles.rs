//! Independent brute-force references: a discretized-bath closed-system
//! evolution (the system plus N explicit bath oscillators, traced exactly at
//! the Gaussian level) and quantum-master-equation moment ODEs in their
//! small-ħ and classical variants.
//!
//! These share no code path with the influence-functional propagator beyond
//! the drive profile, so elementwise agreement is a genuine end-to-end check.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::config::{Mode, SystemConfig};
use crate::error::{Error, Result};
use crate::floquet::omega_sq;
use crate::gaussian::{
    lab_to_normal, log_negativity, normal_to_lab, thermal_factor, CovarianceMatrix,
    ModeCovariance,
};
use crate::integrate::advance;

/// Fixed step of the closed-system RK4 sweep; small enough that ω_max = 2Λc
/// is resolved (ω_max·h = 0.2 at Λc = 50).
pub const CLOSED_STEP: f64 = 0.002;

/// One discretized Ohmic bath: frequencies, couplings and the counter-term
/// that completes the square in the system frequency.
#[derive(Debug, Clone)]
pub struct DiscretizedBath {
    pub omegas: Vec<f64>,
    pub couplings: Vec<f64>,
    pub counterterm: f64,
    pub cutoff: f64,
}

impl DiscretizedBath {
    pub fn n(&self) -> usize {
        self.omegas.len()
    }

    pub fn recurrence_time(&self) -> f64 {
        let dw = 2.0 * self.cutoff / self.n() as f64;
        2.0 * std::f64::consts::PI / dw
    }

    /// Friction kernel reconstructed from the discrete modes,
    /// γ(s) = Σ_k (c_k²/ω_k²) cos(ω_k s).
    pub fn friction_kernel(&self, s: f64) -> f64 {
        self.omegas
            .iter()
            .zip(&self.couplings)
            .map(|(&w, &c)| c * c / (w * w) * (w * s).cos())
            .sum()
    }

    /// Integrated spectral weight Σ_k (π/2)·c_k²/ω_k, which should match
    /// ∫₀^{2Λc} I(ω) dω.
    pub fn integrated_weight(&self) -> f64 {
        self.omegas
            .iter()
            .zip(&self.couplings)
            .map(|(&w, &c)| 0.5 * std::f64::consts::PI * c * c / w)
            .sum()
    }
}

/// Uniform-in-frequency discretization of I(ω) = gω e^{−ω/Λc} up to 2Λc:
/// ω_k = (k+½)Δω and c_k² = (2/π)·ω_k·I(ω_k)·Δω, so each mode carries its
/// density slice. Errors if the recurrence time 2π/Δω is shorter than the
/// configured horizon.
pub fn discretize_bath(config: &SystemConfig, n: usize) -> Result<DiscretizedBath> {
    if n < 50 {
        return Err(Error::Config(format!("bath discretization: need N ≥ 50 modes, got {n}")));
    }
    let dw = 2.0 * config.cutoff / n as f64;
    let t_rec = 2.0 * std::f64::consts::PI / dw;
    let horizon = config.horizon_time();
    if t_rec < horizon && config.g > 0.0 {
        return Err(Error::Recurrence { t_rec, horizon });
    }
    let mut omegas = Vec::with_capacity(n);
    let mut couplings = Vec::with_capacity(n);
    let mut counterterm = 0.0;
    for k in 0..n {
        let w = (k as f64 + 0.5) * dw;
        let spectral = config.g * w * (-w / config.cutoff).exp();
        let c2 = (2.0 / std::f64::consts::PI) * w * spectral * dw;
        omegas.push(w);
        couplings.push(c2.sqrt());
        counterterm += c2 / (w * w);
    }
    Ok(DiscretizedBath { omegas, couplings, counterterm, cutoff: config.cutoff })
}

/// dy/dt for one column of the closed-system fundamental matrix. Layout:
/// y = (x0, x_1..x_N, p0, p_1..p_N); the force matrix is arrow-sparse.
fn closed_rhs(y: &[f64], dy: &mut [f64], om2_plus_mu: f64, bath: &DiscretizedBath) {
    let m = 1 + bath.n();
    dy[..m].copy_from_slice(&y[m..]);
    let mut coupling_sum = 0.0;
    for k in 0..bath.n() {
        let xk = y[1 + k];
        coupling_sum += bath.couplings[k] * xk;
        dy[m + 1 + k] = -bath.omegas[k] * bath.omegas[k] * xk + bath.couplings[k] * y[0];
    }
    dy[m] = -om2_plus_mu * y[0] + coupling_sum;
}

/// RK4 step aligned to the propagator's fine grid so sample times land
/// exactly on bath steps: the largest integer fraction of the fine step
/// not exceeding CLOSED_STEP.
fn aligned_step(config: &SystemConfig) -> f64 {
    let fine = config.fine_step();
    fine / (fine / CLOSED_STEP).ceil().max(1.0)
}

/// Precompute Ω²(t)+μ on the RK4 half-step grid: index 2k is t_k, 2k+1 is
/// t_k + h/2.
fn half_step_frequencies(
    config: &SystemConfig,
    mode: Mode,
    bath: &DiscretizedBath,
    h: f64,
    steps: usize,
) -> Vec<f64> {
    (0..=2 * steps)
        .map(|j| {
            let t = 0.5 * j as f64 * h;
            omega_sq(config, mode, t) + bath.counterterm
        })
        .collect()
}

/// Integrate one column of the fundamental matrix with RK4, recording the
/// (x0, p0) components at the requested step indices.
fn integrate_column(
    col: usize,
    dim: usize,
    om2: &[f64],
    bath: &DiscretizedBath,
    h: f64,
    steps: usize,
    sample_steps: &[usize],
) -> Vec<(f64, f64)> {
    let m = dim / 2;
    let mut y = vec![0.0; dim];
    y[col] = 1.0;
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    let mut out = Vec::with_capacity(sample_steps.len());
    let mut next_sample = 0;
    for step in 0..=steps {
        while next_sample < sample_steps.len() && sample_steps[next_sample] == step {
            out.push((y[0], y[m]));
            next_sample += 1;
        }
        if step == steps {
            break;
        }
        let (w0, wh, w1) = (om2[2 * step], om2[2 * step + 1], om2[2 * step + 2]);
        closed_rhs(&y, &mut k1, w0, bath);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        closed_rhs(&tmp, &mut k2, wh, bath);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        closed_rhs(&tmp, &mut k3, wh, bath);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        closed_rhs(&tmp, &mut k4, w1, bath);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    out
}

/// Exact reduced system covariance of one normal mode from the closed
/// system-plus-bath evolution: σ(t) = Φ(t) σ₀ Φ(t)ᵀ restricted to the
/// system rows, with the bath initially thermal at θ and no system–bath
/// correlations.
pub fn evolve_closed(
    config: &SystemConfig,
    mode: Mode,
    bath: &DiscretizedBath,
    init: &ModeCovariance,
    t_grid: &[f64],
) -> Result<Vec<ModeCovariance>> {
    config.validate()?;
    let t_max = t_grid.iter().cloned().fold(0.0_f64, f64::max);
    let t_rec = bath.recurrence_time();
    // an uncoupled bath never echoes back into the system
    if t_rec < t_max && config.g > 0.0 {
        return Err(Error::Recurrence { t_rec, horizon: t_max });
    }
    let h = aligned_step(config);
    let steps = (t_max / h).ceil() as usize;
    let mut sample_steps: Vec<usize> = t_grid
        .iter()
        .map(|&t| ((t / h).round() as usize).min(steps))
        .collect();
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..sample_steps.len()).collect();
        idx.sort_by_key(|&i| sample_steps[i]);
        idx
    };
    sample_steps.sort_unstable();

    let m = 1 + bath.n();
    let dim = 2 * m;
    let om2 = half_step_frequencies(config, mode, bath, h, steps);

    // rows 0 (x0) and m (p0) of Φ at the sample times, assembled column by
    // column; each column is an independent ODE
    let rows: Vec<Vec<(f64, f64)>> = (0..dim)
        .into_par_iter()
        .map(|col| integrate_column(col, dim, &om2, bath, h, steps, &sample_steps))
        .collect();

    // initial covariance: diagonal apart from the system's x0–p0 element
    let mut diag = vec![0.0; dim];
    diag[0] = init.sxx;
    diag[m] = init.spp;
    for k in 0..bath.n() {
        let w = bath.omegas[k];
        let f = thermal_factor(w, config.theta);
        diag[1 + k] = 0.5 * f / w;
        diag[m + 1 + k] = 0.5 * f * w;
    }

    let mut out = vec![
        ModeCovariance { mode, sxx: 0.0, sxp: 0.0, spp: 0.0 };
        sample_steps.len()
    ];
    for (s, slot) in order.iter().enumerate() {
        let mut sxx = 0.0;
        let mut sxp = 0.0;
        let mut spp = 0.0;
        for (j, row) in rows.iter().enumerate() {
            let (rx, rp) = row[s];
            sxx += diag[j] * rx * rx;
            sxp += diag[j] * rx * rp;
            spp += diag[j] * rp * rp;
        }
        let (x0, p0) = rows[0][s];
        let (xm, pm) = rows[m][s];
        sxx += 2.0 * init.sxp * x0 * xm;
        sxp += init.sxp * (x0 * pm + xm * p0);
        spp += 2.0 * init.sxp * p0 * pm;
        out[*slot] = ModeCovariance { mode, sxx, sxp, spp };
    }
    Ok(out)
}

/// Full closed-system fundamental matrix at t_final (test utility for the
/// symplectic-invariance check; dense, use small N).
pub fn closed_fundamental_matrix(
    config: &SystemConfig,
    mode: Mode,
    bath: &DiscretizedBath,
    t_final: f64,
    h: f64,
) -> DMatrix<f64> {
    let steps = (t_final / h).ceil() as usize;
    let m = 1 + bath.n();
    let dim = 2 * m;
    let om2 = half_step_frequencies(config, mode, bath, h, steps);
    let mut phi = DMatrix::zeros(dim, dim);
    let full: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|col| {
            let mut y = vec![0.0; dim];
            y[col] = 1.0;
            let mut k1 = vec![0.0; dim];
            let mut k2 = vec![0.0; dim];
            let mut k3 = vec![0.0; dim];
            let mut k4 = vec![0.0; dim];
            let mut tmp = vec![0.0; dim];
            for step in 0..steps {
                let (w0, wh, w1) = (om2[2 * step], om2[2 * step + 1], om2[2 * step + 2]);
                closed_rhs(&y, &mut k1, w0, bath);
                for i in 0..dim {
                    tmp[i] = y[i] + 0.5 * h * k1[i];
                }
                closed_rhs(&tmp, &mut k2, wh, bath);
                for i in 0..dim {
                    tmp[i] = y[i] + 0.5 * h * k2[i];
                }
                closed_rhs(&tmp, &mut k3, wh, bath);
                for i in 0..dim {
                    tmp[i] = y[i] + h * k3[i];
                }
                closed_rhs(&tmp, &mut k4, w1, bath);
                for i in 0..dim {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            y
        })
        .collect();
    for (j, col) in full.iter().enumerate() {
        for i in 0..dim {
            phi[(i, j)] = col[i];
        }
    }
    phi
}

/// QME diffusion variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmeVariant {
    SmallHbar,
    Classical,
}

fn qme_diffusion(config: &SystemConfig, mode: Mode, variant: QmeVariant, t: f64) -> (f64, f64) {
    match variant {
        QmeVariant::SmallHbar => {
            let d = crate::kernel::small_hbar_diffusion(config, mode, t)
                .expect("theta > 0 checked at entry");
            (d.d_pp, d.d_px)
        }
        QmeVariant::Classical => (config.g * config.theta, 0.0),
    }
}

/// Second-moment ODEs of the (small-ħ or classical) master equation for one
/// normal mode, sampled on t_grid (must be ascending from 0).
pub fn qme_evolve_mode(
    config: &SystemConfig,
    mode: Mode,
    variant: QmeVariant,
    init: &ModeCovariance,
    t_grid: &[f64],
) -> Result<Vec<ModeCovariance>> {
    config.validate()?;
    if variant == QmeVariant::SmallHbar && config.theta <= 0.0 {
        return Err(Error::Domain("small-ħ master equation requires theta > 0".into()));
    }
    let g = config.g;
    let rhs = |t: f64, y: &[f64; 3]| -> [f64; 3] {
        let om2 = omega_sq(config, mode, t);
        let (d_pp, d_px) = qme_diffusion(config, mode, variant, t);
        [
            2.0 * y[1],
            y[2] - om2 * y[0] - g * y[1] + 2.0 * d_px,
            -2.0 * om2 * y[1] - 2.0 * g * y[2] + 2.0 * d_pp,
        ]
    };
    let mut y = [init.sxx, init.sxp, init.spp];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &tq in t_grid {
        if tq < t - 1e-12 {
            return Err(Error::Config("qme_evolve_mode: t_grid must be ascending".into()));
        }
        if tq > t {
            // march in drive-period-resolving chunks; `advance` subdivides
            // further as needed for the local tolerance
            let chunk = config.drive_period() / 64.0;
            let mut s = t;
            while s < tq - 1e-12 {
                let step = chunk.min(tq - s);
                y = advance(&rhs, s, &y, step)?;
                s += step;
            }
            t = tq;
        }
        out.push(ModeCovariance { mode, sxx: y[0], sxp: y[1], spp: y[2] });
    }
    Ok(out)
}

/// Full-system QME trajectory for initial states with no cross-mode
/// correlations (thermal products, vacuum): both normal modes evolved
/// independently and reassembled with E_N per sample.
pub fn qme_evolve(
    config: &SystemConfig,
    variant: QmeVariant,
    initial: &CovarianceMatrix,
    t_grid: &[f64],
) -> Result<Vec<(f64, CovarianceMatrix, f64)>> {
    let (init_p, init_m, cross) = lab_to_normal(initial);
    if cross.norm() > 1e-10 * initial.frobenius_norm() {
        return Err(Error::Config(
            "qme_evolve: initial state carries cross-mode correlations; evolve modes separately"
                .into(),
        ));
    }
    let (plus, minus) = rayon::join(
        || qme_evolve_mode(config, Mode::Plus, variant, &init_p, t_grid),
        || qme_evolve_mode(config, Mode::Minus, variant, &init_m, t_grid),
    );
    let (plus, minus) = (plus?, minus?);
    let zero = nalgebra::Matrix2::zeros();
    let mut out = Vec::with_capacity(t_grid.len());
    for i in 0..t_grid.len() {
        let cov = normal_to_lab(&plus[i], &minus[i], &zero);
        let en = log_negativity(&cov)?.log_negativity;
        out.push((t_grid[i], cov, en));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::integrate_fundamentals;
    use crate::kernel::{InfluenceBuilder, NoiseKernelCache};
    use approx::assert_relative_eq;

    fn base_config() -> SystemConfig {
        SystemConfig {
            theta: 1.0,
            g: 0.01,
            kappa1: 0.0,
            delta: 2.0,
            horizon: 3.0,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn bath_spectral_weight_within_two_percent() {
        let c = base_config();
        let bath = discretize_bath(&c, 300).unwrap();
        // ∫₀^{2Λ} gω e^{−ω/Λ} dω = gΛ²(1 − 3e^{−2})
        let target = c.g * c.cutoff * c.cutoff * (1.0 - 3.0 * (-2.0f64).exp());
        assert_relative_eq!(bath.integrated_weight(), target, max_relative = 0.02);
    }

    #[test]
    fn recurrence_guard() {
        let mut c = base_config();
        c.horizon = 7.0; // horizon time ≈ 22 > t_rec(N=300) ≈ 18.8
        let err = discretize_bath(&c, 300).unwrap_err();
        assert!(matches!(err, Error::Recurrence { .. }));
        c.horizon = 6.0; // ≈ 18.8 just clears with N = 320
        let bath = discretize_bath(&c, 320).unwrap();
        assert!(bath.recurrence_time() > c.horizon_time());
    }

    #[test]
    fn zero_coupling_bath_is_unitary() {
        let mut c = base_config();
        c.g = 0.0;
        c.theta = 0.0;
        let bath = discretize_bath(&c, 64).unwrap();
        assert!(bath.couplings.iter().all(|&ck| ck == 0.0));
        let vac = ModeCovariance::vacuum(Mode::Plus);
        let grid = [0.0, 1.0, 2.5];
        let covs = evolve_closed(&c, Mode::Plus, &bath, &vac, &grid).unwrap();
        for cov in &covs {
            assert_relative_eq!(cov.sxx, 0.5, epsilon = 1e-6);
            assert_relative_eq!(cov.spp, 0.5, epsilon = 1e-6);
        }
    }

    #[test]
    fn friction_kernel_integrates_to_friction_constant() {
        let c = base_config();
        let bath = discretize_bath(&c, 300).unwrap();
        // ∫₀^ε γ(s) ds → g once ε ≫ 1/Λc (2g over the symmetric window);
        // the continuum tail goes as (2/π)·arctan(Λc·ε), so ε must be large
        // against 1/Λc for percent-level agreement
        let eps = 5.0;
        let n = 20000;
        let h = eps / n as f64;
        let mut integral = 0.5 * h * (bath.friction_kernel(0.0) + bath.friction_kernel(eps));
        for i in 1..n {
            integral += h * bath.friction_kernel(i as f64 * h);
        }
        assert_relative_eq!(2.0 * integral, 2.0 * c.g, max_relative = 0.02);
    }

    #[test]
    fn closed_evolution_is_symplectic() {
        let mut c = base_config();
        c.kappa1 = 0.2;
        c.delta = 1.996;
        c.horizon = 0.6; // keep well inside t_rec ≈ 3.8 for N = 60
        let bath = discretize_bath(&c, 60).unwrap();
        // RK4 is not exactly symplectic; a fine step keeps the O(h⁴) defect
        // below the 1e-8 target
        let phi = closed_fundamental_matrix(&c, Mode::Plus, &bath, 2.0, 1e-4);
        let m = 1 + bath.n();
        let dim = 2 * m;
        let mut j = DMatrix::zeros(dim, dim);
        for i in 0..m {
            j[(i, m + i)] = 1.0;
            j[(m + i, i)] = -1.0;
        }
        let defect = (&phi * &j * phi.transpose() - &j).abs().max();
        assert!(defect < 1e-8, "symplectic defect {defect}");
    }

    #[test]
    fn closed_thermal_state_stays_near_equilibrium() {
        let mut c = base_config();
        c.horizon = 3.0; // ≈ 9.4 natural units
        let bath = discretize_bath(&c, 200).unwrap();
        let eq = 0.5 * thermal_factor(1.0, c.theta);
        let init = ModeCovariance { mode: Mode::Plus, sxx: eq, sxp: 0.0, spp: eq };
        let grid = [2.0, 5.0, 9.0];
        let covs = evolve_closed(&c, Mode::Plus, &bath, &init, &grid).unwrap();
        for cov in &covs {
            // the coupled oscillator equilibrates ~1.2% above the bare coth
            // value (an O(g·lnΛc) renormalization), so the comparison with
            // the uncoupled formula is only good to 2%
            assert_relative_eq!(cov.sxx, eq, max_relative = 2e-2);
            assert_relative_eq!(cov.spp, eq, max_relative = 2e-2);
            assert!(cov.sxp.abs() < 1e-2);
        }
    }

    #[test]
    fn influence_coefficients_match_bath_inversion() {
        // invert the exact bath covariance for the a_ij at t = 5 and compare
        // with the influence-functional values
        let mut c = base_config();
        c.horizon = 2.0; // ≈ 6.3 natural units
        let bath = discretize_bath(&c, 240).unwrap();
        // query exactly on the fine grid so both methods see the same time
        let idx = 3260usize;
        let t_query = idx as f64 * c.fine_step();
        let eq = 0.5 * thermal_factor(1.0, c.theta);
        let init = ModeCovariance { mode: Mode::Plus, sxx: eq, sxp: 0.0, spp: eq };
        let covs = evolve_closed(&c, Mode::Plus, &bath, &init, &[t_query]).unwrap();
        let sb = covs[0];

        let fset = integrate_fundamentals(&c, Mode::Plus).unwrap();
        let kernel =
            NoiseKernelCache::build(c.theta, c.g, c.cutoff, c.fine_step(), c.fine_steps()).unwrap();
        let builder = InfluenceBuilder::build(&fset, &kernel).unwrap();
        let (a11, a12, a22) = builder.a_coefficients(&fset, idx).unwrap();

        let gam = fset.gamma;
        let a = fset.f2[idx] - gam * fset.f1[idx];
        let ad = fset.f2d[idx] - gam * fset.f1d[idx];
        let (b, bd) = (fset.f1[idx], fset.f1d[idx]);
        let hom_xx = a * a * init.sxx + b * b * init.spp;
        let hom_xp = a * ad * init.sxx + b * bd * init.spp;
        let hom_pp = ad * ad * init.sxx + bd * bd * init.spp;
        let a11_b = (sb.sxx - hom_xx) / (2.0 * b * b);
        let a12_b = (sb.sxp - hom_xp - 2.0 * b * bd * a11_b) / (2.0 * b);
        let a22_b = (sb.spp - hom_pp - 2.0 * bd * bd * a11_b - 4.0 * bd * a12_b) / 2.0;

        // the residual (~2% on a11, stable under refinement of N, ω_max,
        // the RK4 step and the kernel grid) is the physical difference
        // between strictly local Ohmic damping in the fundamentals and the
        // finite-cutoff memory friction carried by the explicit bath
        assert_relative_eq!(a11_b, a11, max_relative = 0.03);
        assert_relative_eq!(a12_b, a12, max_relative = 0.03);
        // a22 carries the momentum-variance slip, which the explicit bath
        // smooths over 1/Λc while the influence formulas keep it sharp
        assert_relative_eq!(a22_b, a22, max_relative = 0.06);
    }

    #[test]
    fn classical_qme_reaches_equipartition() {
        let mut c = base_config();
        c.theta = 50.0;
        c.g = 0.1;
        let init =
            ModeCovariance { mode: Mode::Plus, sxx: 1.3 * c.theta, sxp: 0.0, spp: 0.7 * c.theta };
        let grid = [0.0, 50.0, 100.0];
        let covs = qme_evolve_mode(&c, Mode::Plus, QmeVariant::Classical, &init, &grid).unwrap();
        let last = covs.last().unwrap();
        assert_relative_eq!(last.sxx, c.theta, max_relative = 1e-2);
        assert_relative_eq!(last.spp, c.theta, max_relative = 1e-2);
    }

    #[test]
    fn small_hbar_qme_matches_classical_at_extreme_temperature() {
        let mut c = base_config();
        c.theta = 1000.0;
        c.g = 0.05;
        let init = ModeCovariance::thermal(Mode::Plus, c.theta);
        let grid = [0.0, 40.0, 80.0];
        let sh = qme_evolve_mode(&c, Mode::Plus, QmeVariant::SmallHbar, &init, &grid).unwrap();
        let cl = qme_evolve_mode(&c, Mode::Plus, QmeVariant::Classical, &init, &grid).unwrap();
        for (a, b) in sh.iter().zip(&cl) {
            assert_relative_eq!(a.sxx, b.sxx, max_relative = 1e-3);
            assert_relative_eq!(a.spp, b.spp, max_relative = 1e-3);
        }
    }

    #[test]
    fn qme_full_state_rejects_cross_correlated_initial() {
        let c = base_config();
        let plus = ModeCovariance::thermal(Mode::Plus, 1.0);
        let minus = ModeCovariance::thermal(Mode::Minus, 1.0);
        let cross = nalgebra::Matrix2::new(0.1, 0.0, 0.0, 0.1);
        let state = normal_to_lab(&plus, &minus, &cross);
        let err = qme_evolve(&c, QmeVariant::Classical, &state, &[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
