//! Gaussian-state layer: covariance matrices, state constructors, the
//! lab ↔ normal-mode rotation and logarithmic negativity.
//!
//! Phase-space ordering is ξ = (Q1, Q2, P1, P2) in the lab frame and
//! (x+, x−, p+, p−) in the normal-mode frame, with Q± = (Q1 ± Q2)/√2.

use nalgebra::{Matrix2, Matrix4, Vector4};
use serde::Serialize;

use crate::config::Mode;
use crate::error::{Error, Result};

/// coth with the θ → 0 (vacuum) limit built in: thermal_factor(Ω, θ) = coth(Ω/2θ).
pub fn thermal_factor(omega: f64, theta: f64) -> f64 {
    if theta <= 0.0 {
        1.0
    } else {
        1.0 / (omega / (2.0 * theta)).tanh()
    }
}

/// 4×4 symmetric covariance matrix of the two oscillators, ħ = m = ω = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    m: Matrix4<f64>,
}

/// Second moments of a single normal mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCovariance {
    pub mode: Mode,
    pub sxx: f64,
    pub sxp: f64,
    pub spp: f64,
}

impl ModeCovariance {
    pub fn vacuum(mode: Mode) -> Self {
        ModeCovariance { mode, sxx: 0.5, sxp: 0.0, spp: 0.5 }
    }

    pub fn thermal(mode: Mode, theta: f64) -> Self {
        let s = 0.5 * thermal_factor(1.0, theta);
        ModeCovariance { mode, sxx: s, sxp: 0.0, spp: s }
    }

    pub fn as_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.sxx, self.sxp, self.sxp, self.spp)
    }

    /// det σ − 1/4; the single-mode Heisenberg relation requires this ≥ 0.
    pub fn uncertainty_margin(&self) -> f64 {
        self.sxx * self.spp - self.sxp * self.sxp - 0.25
    }
}

/// First moments of a single normal mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentVector {
    pub mean_x: f64,
    pub mean_p: f64,
}

impl MomentVector {
    pub fn zero() -> Self {
        MomentVector { mean_x: 0.0, mean_p: 0.0 }
    }
}

/// Logarithmic negativity together with the symplectic spectrum of the
/// partially transposed covariance (± paired, ascending).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntanglementResult {
    pub log_negativity: f64,
    pub symplectic_spectrum: [f64; 4],
}

/// Normal-mode rotation R ⊕ R with R = [[1,1],[1,−1]]/√2; symmetric and
/// involutory, so the same matrix maps in both directions.
fn normal_rotation() -> Matrix4<f64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Matrix4::new(
        r, r, 0.0, 0.0, //
        r, -r, 0.0, 0.0, //
        0.0, 0.0, r, r, //
        0.0, 0.0, r, -r,
    )
}

/// Symplectic form Σ for the ordering (Q1, Q2, P1, P2).
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

impl CovarianceMatrix {
    /// Build from an explicitly symmetric matrix; asymmetry beyond 1e-12
    /// relative is a domain error, smaller asymmetry is symmetrized away.
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let scale = m.norm().max(1e-300);
        let asym = (m - m.transpose()).norm() / scale;
        if asym > 1e-12 {
            return Err(Error::Domain(format!(
                "covariance matrix not symmetric: relative asymmetry {asym:.3e}"
            )));
        }
        Ok(CovarianceMatrix { m: 0.5 * (m + m.transpose()) })
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    /// Thermal product state of the two lab oscillators at temperature θ.
    pub fn thermal_product(theta: f64) -> Result<Self> {
        if theta < 0.0 {
            return Err(Error::Domain(format!("thermal state: theta must be ≥ 0, got {theta}")));
        }
        let s = 0.5 * thermal_factor(1.0, theta);
        Ok(CovarianceMatrix { m: Matrix4::from_diagonal(&Vector4::new(s, s, s, s)) })
    }

    /// Two-mode squeezed vacuum with squeezing parameter r.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let c = 0.5 * (2.0 * r).cosh();
        let s = 0.5 * (2.0 * r).sinh();
        CovarianceMatrix {
            m: Matrix4::new(
                c, s, 0.0, 0.0, //
                s, c, 0.0, 0.0, //
                0.0, 0.0, c, -s, //
                0.0, 0.0, -s, c,
            ),
        }
    }

    /// Weak-coupling Gibbs state of the statically coupled Hamiltonian
    /// (coupling κ0), assembled from the normal-mode coth formulas.
    pub fn gibbs(theta: f64, kappa0: f64) -> Result<Self> {
        if theta < 0.0 {
            return Err(Error::Domain(format!("Gibbs state: theta must be ≥ 0, got {theta}")));
        }
        if kappa0 >= 1.0 {
            return Err(Error::Domain(format!(
                "Gibbs state: kappa0 = {kappa0} makes the − mode unstable (needs kappa0 < 1)"
            )));
        }
        let mut modes = [ModeCovariance::vacuum(Mode::Plus), ModeCovariance::vacuum(Mode::Minus)];
        for mc in modes.iter_mut() {
            let om = (1.0 + mc.mode.sign() * kappa0).sqrt();
            let cf = thermal_factor(om, theta);
            mc.sxx = 0.5 * cf / om;
            mc.spp = 0.5 * cf * om;
            mc.sxp = 0.0;
        }
        Ok(normal_to_lab(&modes[0], &modes[1], &Matrix2::zeros()))
    }

    /// Purity of the Gaussian state, 1/(4 √det σ) in ħ = 1 units.
    pub fn purity(&self) -> f64 {
        1.0 / (4.0 * self.m.determinant().max(0.0).sqrt())
    }

    /// Symplectic eigenvalues of σ itself (not the partial transpose),
    /// ascending, each listed once.
    pub fn symplectic_eigenvalues(&self) -> [f64; 2] {
        symplectic_pair(&self.m)
    }

    /// min symplectic eigenvalue − 1/2; non-negative for physical states.
    pub fn heisenberg_margin(&self) -> f64 {
        self.symplectic_eigenvalues()[0] - 0.5
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn position_spread(&self) -> f64 {
        self.m[(0, 0)].max(0.0).sqrt()
    }
}

/// Distinct symplectic eigenvalues of a 4×4 second-moment matrix, ascending.
///
/// Uses the closed-form two-mode invariants rather than the spectrum of Σσ:
/// with σ in per-oscillator blocks [[A, C], [Cᵀ, B]],
/// ν±² = (Δ ± √(Δ² − 4 det σ))/2 with Δ = det A + det B + 2 det C.
/// (The general-purpose nonsymmetric eigensolver is also an option, but its
/// iteration can stall on the purely imaginary ± pair structure of Σσ.)
fn symplectic_pair(m: &Matrix4<f64>) -> [f64; 2] {
    let a = Matrix2::new(m[(0, 0)], m[(0, 2)], m[(2, 0)], m[(2, 2)]);
    let b = Matrix2::new(m[(1, 1)], m[(1, 3)], m[(3, 1)], m[(3, 3)]);
    let c = Matrix2::new(m[(0, 1)], m[(0, 3)], m[(2, 1)], m[(2, 3)]);
    let delta = a.determinant() + b.determinant() + 2.0 * c.determinant();
    let det = m.determinant().max(0.0);
    let disc = (delta * delta - 4.0 * det).max(0.0);
    let hi_sq = 0.5 * (delta + disc.sqrt());
    // ν−² as det/ν+² rather than (Δ − √disc)/2: the subtraction cancels
    // catastrophically once ‖σ‖ is large (amplified trajectories) while the
    // quotient stays accurate
    let lo_sq = if hi_sq > 0.0 { det / hi_sq } else { 0.0 };
    [lo_sq.sqrt(), hi_sq.max(0.0).sqrt()]
}

/// Split a lab-frame covariance into the two normal modes plus the
/// (x+,p+) × (x−,p−) cross block, which vanishes for states respecting the
/// exchange symmetry.
pub fn lab_to_normal(cov: &CovarianceMatrix) -> (ModeCovariance, ModeCovariance, Matrix2<f64>) {
    let s = normal_rotation();
    let n = s * cov.m * s; // s is symmetric and involutory
    let plus = ModeCovariance { mode: Mode::Plus, sxx: n[(0, 0)], sxp: n[(0, 2)], spp: n[(2, 2)] };
    let minus = ModeCovariance { mode: Mode::Minus, sxx: n[(1, 1)], sxp: n[(1, 3)], spp: n[(3, 3)] };
    let cross = Matrix2::new(n[(0, 1)], n[(0, 3)], n[(2, 1)], n[(2, 3)]);
    (plus, minus, cross)
}

/// Rebuild the lab-frame covariance from per-mode data and the cross block.
pub fn normal_to_lab(
    plus: &ModeCovariance,
    minus: &ModeCovariance,
    cross: &Matrix2<f64>,
) -> CovarianceMatrix {
    let mut n = Matrix4::zeros();
    n[(0, 0)] = plus.sxx;
    n[(0, 2)] = plus.sxp;
    n[(2, 0)] = plus.sxp;
    n[(2, 2)] = plus.spp;
    n[(1, 1)] = minus.sxx;
    n[(1, 3)] = minus.sxp;
    n[(3, 1)] = minus.sxp;
    n[(3, 3)] = minus.spp;
    n[(0, 1)] = cross[(0, 0)];
    n[(1, 0)] = cross[(0, 0)];
    n[(0, 3)] = cross[(0, 1)];
    n[(3, 0)] = cross[(0, 1)];
    n[(2, 1)] = cross[(1, 0)];
    n[(1, 2)] = cross[(1, 0)];
    n[(2, 3)] = cross[(1, 1)];
    n[(3, 2)] = cross[(1, 1)];
    let s = normal_rotation();
    CovarianceMatrix { m: s * n * s }
}

/// Logarithmic negativity E_N of the 1|2 bipartition.
///
/// The covariance is partially transposed (sign flip of the P2 row and
/// column) before the symplectic spectrum is taken; E_N sums −log2(2ν̃)
/// over the symplectic eigenvalues ν̃ < 1/2 of the transposed matrix.
pub fn log_negativity(cov: &CovarianceMatrix) -> Result<EntanglementResult> {
    // physicality gate, with a scale-aware tolerance: when the two
    // symplectic eigenvalues are (near-)degenerate the discriminant
    // Δ² − 4 det σ cancels exactly and the round-off in ν enters at
    // √ε_machine times the squared covariance scale
    let frob = cov.frobenius_norm();
    let tol = (1e-9_f64).max(3e-8 * (1.0 + frob * frob));
    let margin = cov.heisenberg_margin();
    if margin < -tol {
        return Err(Error::Domain(format!(
            "unphysical covariance: min symplectic eigenvalue {:.6e} violates the Heisenberg bound 1/2",
            margin + 0.5
        )));
    }

    let mut pt = cov.m;
    for k in 0..4 {
        pt[(3, k)] = -pt[(3, k)];
        pt[(k, 3)] = -pt[(k, 3)];
    }
    let pair = symplectic_pair(&pt);
    let mut en = 0.0;
    for nu in pair {
        if 2.0 * nu < 1.0 && nu > 0.0 {
            en -= (2.0 * nu).log2();
        }
    }
    Ok(EntanglementResult {
        log_negativity: en.max(0.0),
        symplectic_spectrum: [pair[0], pair[0], pair[1], pair[1]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn thermal_product_values() {
        let v = CovarianceMatrix::thermal_product(0.0).unwrap();
        for i in 0..4 {
            assert_relative_eq!(v.matrix()[(i, i)], 0.5, max_relative = 1e-15);
        }
        let t = CovarianceMatrix::thermal_product(10.0).unwrap();
        assert_relative_eq!(t.matrix()[(0, 0)], 10.00833, max_relative = 1e-5);
        let h = CovarianceMatrix::thermal_product(0.5).unwrap();
        assert_relative_eq!(h.matrix()[(0, 0)], 0.5 / 1.0f64.tanh(), max_relative = 1e-12);
        assert_relative_eq!(h.matrix()[(0, 0)], 0.6565, max_relative = 1e-4);
        assert!(CovarianceMatrix::thermal_product(-1.0).is_err());
    }

    #[test]
    fn tmsv_negativity_matches_analytic() {
        for r in [0.0f64, 0.1, 0.5, 1.0, 2.0] {
            let cov = CovarianceMatrix::two_mode_squeezed(r);
            let en = log_negativity(&cov).unwrap().log_negativity;
            assert_relative_eq!(en, 2.0 * r / LN2, epsilon = 1e-9);
        }
    }

    #[test]
    fn thermal_products_are_separable() {
        for theta in [0.0, 1.0, 100.0] {
            let cov = CovarianceMatrix::thermal_product(theta).unwrap();
            assert_eq!(log_negativity(&cov).unwrap().log_negativity, 0.0);
        }
    }

    #[test]
    fn normal_transform_round_trip() {
        let cov = CovarianceMatrix::two_mode_squeezed(1.0);
        let (p, m, cross) = lab_to_normal(&cov);
        assert!(cross.norm() < 1e-14, "TMSV decouples in normal modes");
        // mode + squeezed in one quadrature, − in the conjugate one
        assert_relative_eq!(p.sxx, 0.5 * (2.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(p.spp, 0.5 * (-2.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(m.sxx, 0.5 * (-2.0f64).exp(), max_relative = 1e-12);
        let back = normal_to_lab(&p, &m, &cross);
        assert!((back.matrix() - cov.matrix()).norm() < 1e-12);
    }

    #[test]
    fn thermal_split_is_symmetric() {
        let cov = CovarianceMatrix::thermal_product(1.0).unwrap();
        let (p, m, cross) = lab_to_normal(&cov);
        assert_eq!(cross.norm(), 0.0);
        assert_relative_eq!(p.sxx, m.sxx, max_relative = 1e-15);
        assert_relative_eq!(p.sxx, 0.5 * thermal_factor(1.0, 1.0), max_relative = 1e-15);
    }

    #[test]
    fn gibbs_entanglement_boundary() {
        let cold = CovarianceMatrix::gibbs(0.2, 0.5).unwrap();
        assert!(log_negativity(&cold).unwrap().log_negativity > 0.0);
        let warm = CovarianceMatrix::gibbs(2.0, 0.5).unwrap();
        assert_eq!(log_negativity(&warm).unwrap().log_negativity, 0.0);
        assert!(CovarianceMatrix::gibbs(1.0, 1.0).is_err());
    }

    #[test]
    fn purity_and_margin() {
        let v = CovarianceMatrix::thermal_product(0.0).unwrap();
        assert_relative_eq!(v.purity(), 1.0, epsilon = 1e-12);
        assert!(v.heisenberg_margin().abs() < 1e-12);
        let t = CovarianceMatrix::thermal_product(10.0).unwrap();
        let s = t.matrix()[(0, 0)];
        assert_relative_eq!(t.purity(), 1.0 / (2.0 * s).powi(2), max_relative = 1e-12);
        assert_relative_eq!(t.purity(), 0.002497, max_relative = 1e-3);
    }

    #[test]
    fn unphysical_covariance_rejected() {
        let m = Matrix4::from_diagonal(&Vector4::new(0.1, 0.5, 0.1, 0.5));
        let cov = CovarianceMatrix::new(m).unwrap();
        let err = log_negativity(&cov).unwrap_err();
        assert!(err.to_string().contains("Heisenberg"));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let mut m = Matrix4::identity();
        m[(0, 1)] = 0.5;
        assert!(CovarianceMatrix::new(m).is_err());
    }
}
