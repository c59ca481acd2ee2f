//! Bath noise kernel K(s), influence-functional coefficients a_ij and b_i,
//! and diffusion coefficients (exact and small-ħ).
//!
//! The Ohmic spectral density with exponential cutoff is
//! I(ω) = g ω e^{−ω/Λc} (natural units), giving the noise kernel
//!
//!   K(s) = (g/π) ∫₀^∞ dω ω coth(ω/2θ) cos(ωs) e^{−ω/Λc}
//!        = (g/π) Re[ 1/z² + 2θ² ψ₁(1 + θz) ],   z = 1/Λc − is,
//!
//! where ψ₁ is the trigamma function (the closed form is the resummed
//! Matsubara series). The friction kernel of the same density is
//! γ(s) → 2g δ(s) as Λc → ∞, which fixes the normalization: covariances
//! built from these coefficients must relax to the coth equilibrium.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::config::{Mode, SystemConfig};
use crate::error::{Error, Result};
use crate::floquet::{omega_sq, BoundarySolutions, FundamentalSolutionSet};

// ---------------------------------------------------------------------------
// special functions and quadrature helpers
// ---------------------------------------------------------------------------

/// Complex trigamma ψ₁(z) for Re z > 0: recurrence to |z| ≥ 16, then the
/// asymptotic Bernoulli series.
pub fn trigamma(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.norm() < 16.0 {
        acc += (z * z).inv();
        z += 1.0;
    }
    let zi = z.inv();
    let zi2 = zi * zi;
    // ψ₁(z) ~ 1/z + 1/2z² + Σ B_2k / z^{2k+1}
    let tail = zi2
        * (1.0 / 6.0
            + zi2
                * (-1.0 / 30.0
                    + zi2
                        * (1.0 / 42.0
                            + zi2 * (-1.0 / 30.0 + zi2 * (5.0 / 66.0 + zi2 * (-691.0 / 2730.0))))));
    acc + zi + 0.5 * zi2 + zi * tail
}

/// 16-point Gauss–Legendre nodes/weights on [-1, 1], built by Newton
/// iteration on P16 (deterministic, no tables).
fn gauss_legendre_16() -> ([f64; 16], [f64; 16]) {
    const N: usize = 16;
    let mut nodes = [0.0f64; 16];
    let mut weights = [0.0f64; 16];
    for i in 0..N {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre recurrence for P_N(x) and P'_N(x)
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=N {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (mut q0, mut q1) = (1.0f64, x);
                for k in 2..=N {
                    let kf = k as f64;
                    let q2 = ((2.0 * kf - 1.0) * x * q1 - (kf - 1.0) * q0) / kf;
                    q0 = q1;
                    q1 = q2;
                }
                let dp2 = N as f64 * (x * q1 - q0) / (x * x - 1.0);
                weights[i] = 2.0 / ((1.0 - x * x) * dp2 * dp2);
                break;
            }
        }
        nodes[i] = x;
    }
    (nodes, weights)
}

// ---------------------------------------------------------------------------
// noise kernel cache
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelMethod {
    Quadrature,
    Matsubara,
}

/// K(s) sampled on the uniform fine grid for s ≥ 0 (evenness gives s < 0).
#[derive(Debug, Clone)]
pub struct NoiseKernelCache {
    pub theta: f64,
    pub g: f64,
    pub cutoff: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub method: KernelMethod,
}

/// Closed-form (Matsubara-resummed) kernel value.
pub fn kernel_closed_form(theta: f64, g: f64, cutoff: f64, s: f64) -> f64 {
    let z = Complex64::new(1.0 / cutoff, -s);
    let mut val = (z * z).inv();
    if theta > 0.0 {
        val += 2.0 * theta * theta * trigamma(Complex64::new(1.0, 0.0) + theta * z);
    }
    g / std::f64::consts::PI * val.re
}

/// Direct adaptive-panel quadrature of the kernel integral; independent of
/// the closed form, used as the cross-check method.
pub fn kernel_quadrature(theta: f64, g: f64, cutoff: f64, s: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_16();
    // panel width resolving the cos oscillation, the coth curvature (scale
    // ~2πθ, since x coth x is analytic with poles at ±iπ) and the cutoff
    let mut w = (0.5 * cutoff).min(std::f64::consts::FRAC_PI_2 / s.max(0.01));
    if theta > 0.0 {
        w = w.min((2.0 * theta).max(0.3));
    }
    let omega_max = 40.0 * cutoff;
    let panels = (omega_max / w).ceil() as usize;
    let w = omega_max / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = p as f64 * w;
        let mut acc = 0.0;
        for k in 0..16 {
            let om = a + 0.5 * w * (nodes[k] + 1.0);
            let coth = if theta > 0.0 { 1.0 / (om / (2.0 * theta)).tanh() } else { 1.0 };
            acc += weights[k] * om * coth * (om * s).cos() * (-om / cutoff).exp();
        }
        total += 0.5 * w * acc;
    }
    g / std::f64::consts::PI * total
}

impl NoiseKernelCache {
    /// Build the cache on a uniform grid of `n` steps of size `h`
    /// (n + 1 samples), cross-checking the two evaluation methods.
    pub fn build(theta: f64, g: f64, cutoff: f64, h: f64, n: usize) -> Result<Self> {
        if theta < 0.0 {
            return Err(Error::Domain(format!("noise kernel: theta must be ≥ 0, got {theta}")));
        }
        if cutoff <= 0.0 {
            return Err(Error::Domain(format!("noise kernel: cutoff must be > 0, got {cutoff}")));
        }
        let values: Vec<f64> =
            (0..=n).map(|k| kernel_closed_form(theta, g, cutoff, k as f64 * h)).collect();
        let cache =
            NoiseKernelCache { theta, g, cutoff, h, values, method: KernelMethod::Matsubara };
        if g != 0.0 {
            let worst = cache.cross_check(16);
            if worst > 1e-5 {
                return Err(Error::KernelAccuracy { s: 0.0, rel: worst });
            }
        }
        Ok(cache)
    }

    pub fn k0(&self) -> f64 {
        self.values[0]
    }

    /// Worst relative disagreement between the stored (closed-form) values
    /// and the quadrature method over `npts` grid points in s ∈ [0, 6].
    /// Near the kernel's zero crossings the comparison is floored at
    /// 1e-8·K(0) to keep "relative" meaningful.
    pub fn cross_check(&self, npts: usize) -> f64 {
        let smax_idx = ((6.0 / self.h) as usize).min(self.values.len() - 1);
        let floor = 1e-8 * self.k0().abs().max(1e-300);
        let mut worst = 0.0f64;
        for j in 0..npts {
            let idx = (j * smax_idx) / npts.max(1);
            let s = idx as f64 * self.h;
            let q = kernel_quadrature(self.theta, self.g, self.cutoff, s);
            let c = self.values[idx];
            let rel = (q - c).abs() / c.abs().max(floor);
            worst = worst.max(rel);
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// influence coefficients
// ---------------------------------------------------------------------------

/// a and b coefficients of one mode at one evaluation time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InfluenceCoefficients {
    pub mode: Mode,
    pub t: f64,
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
}

/// Precomputed base integrals
///   k_ab(t) = ∫₀ᵗ∫₀ᵗ g_a(s1) g_b(s2) K(s1−s2) ds1 ds2
/// on the whole fine grid, from which the a_ij at any grid time follow in
/// O(1). Build cost is O(N log N) via FFT convolution; an exponential tilt
/// e^{−λt} keeps round-off proportional to the local solution magnitude
/// even when the anti-damped fundamentals grow by many orders.
#[derive(Debug, Clone)]
pub struct InfluenceBuilder {
    pub h: f64,
    k11: Vec<f64>,
    k12: Vec<f64>,
    k22: Vec<f64>,
}

/// Causal trapezoid convolution c(j) = h Σ'_{i≤j} src(i) ker(j−i) (primed:
/// endpoints at half weight) of tilted sequences, via FFT.
fn causal_convolution(src: &[f64], ker: &[f64], h: f64, lambda: f64) -> Vec<f64> {
    let n = src.len();
    let len = (2 * n).next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); len];
    let mut fb = vec![Complex64::new(0.0, 0.0); len];
    for i in 0..n {
        let tilt = (-lambda * i as f64 * h).exp();
        let w = if i == 0 { 0.5 } else { 1.0 };
        fa[i] = Complex64::new(w * src[i] * tilt, 0.0);
        fb[i] = Complex64::new(ker[i] * tilt, 0.0);
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    fft.process(&mut fa);
    fft.process(&mut fb);
    for i in 0..len {
        fa[i] *= fb[i];
    }
    ifft.process(&mut fa);
    let scale = 1.0 / len as f64;
    let k0 = ker[0];
    (0..n)
        .map(|j| {
            let tilted = fa[j].re * scale - 0.5 * src[j] * (-lambda * j as f64 * h).exp() * k0;
            h * (lambda * j as f64 * h).exp() * tilted
        })
        .collect()
}

/// Same nested quadrature rule as `causal_convolution` + prefix sums, but
/// evaluated directly (O(n²)); used to validate the FFT path.
fn causal_convolution_direct(src: &[f64], ker: &[f64], h: f64, upto: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(upto + 1);
    for j in 0..=upto {
        let mut acc = 0.0;
        for i in 0..=j {
            let w = if i == 0 || i == j { 0.5 } else { 1.0 };
            acc += w * src[i] * ker[j - i];
        }
        if j == 0 {
            acc = 0.0; // degenerate single-point "trapezoid"
        }
        out.push(h * acc);
    }
    out
}

fn prefix_trapezoid(d: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(d.len());
    let mut acc = 0.0;
    out.push(0.0);
    for j in 1..d.len() {
        acc += 0.5 * h * (d[j - 1] + d[j]);
        out.push(acc);
    }
    out
}

impl InfluenceBuilder {
    pub fn build(fset: &FundamentalSolutionSet, kernel: &NoiseKernelCache) -> Result<Self> {
        if (kernel.h - fset.h).abs() > 1e-12 * fset.h || kernel.values.len() < fset.len() {
            return Err(Error::Config(format!(
                "influence builder: kernel grid (h={}, len={}) does not match the fundamental grid (h={}, len={})",
                kernel.h,
                kernel.values.len(),
                fset.h,
                fset.len()
            )));
        }
        let n = fset.len();
        let t_total = (n - 1) as f64 * fset.h;
        let gmax = fset
            .g1
            .iter()
            .chain(fset.g2.iter())
            .fold(1.0f64, |m, &v| m.max(v.abs()));
        let lambda = if t_total > 0.0 { gmax.ln().max(0.0) / t_total } else { 0.0 };

        let ker = &kernel.values[..n];
        let c1 = causal_convolution(&fset.g1, ker, fset.h, lambda);
        let c2 = causal_convolution(&fset.g2, ker, fset.h, lambda);

        let d11: Vec<f64> = (0..n).map(|j| 2.0 * fset.g1[j] * c1[j]).collect();
        let d12: Vec<f64> = (0..n).map(|j| fset.g1[j] * c2[j] + fset.g2[j] * c1[j]).collect();
        let d22: Vec<f64> = (0..n).map(|j| 2.0 * fset.g2[j] * c2[j]).collect();

        Ok(InfluenceBuilder {
            h: fset.h,
            k11: prefix_trapezoid(&d11, fset.h),
            k12: prefix_trapezoid(&d12, fset.h),
            k22: prefix_trapezoid(&d22, fset.h),
        })
    }

    /// Same quantities computed from scratch by direct summation up to
    /// `upto` (O(upto²)); validation hook for the incremental/FFT path.
    pub fn build_direct(
        fset: &FundamentalSolutionSet,
        kernel: &NoiseKernelCache,
        upto: usize,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let ker = &kernel.values[..=upto];
        let c1 = causal_convolution_direct(&fset.g1[..=upto], ker, fset.h, upto);
        let c2 = causal_convolution_direct(&fset.g2[..=upto], ker, fset.h, upto);
        let d11: Vec<f64> = (0..=upto).map(|j| 2.0 * fset.g1[j] * c1[j]).collect();
        let d12: Vec<f64> =
            (0..=upto).map(|j| fset.g1[j] * c2[j] + fset.g2[j] * c1[j]).collect();
        let d22: Vec<f64> = (0..=upto).map(|j| 2.0 * fset.g2[j] * c2[j]).collect();
        (
            prefix_trapezoid(&d11, fset.h),
            prefix_trapezoid(&d12, fset.h),
            prefix_trapezoid(&d22, fset.h),
        )
    }

    pub fn k_values(&self, idx: usize) -> (f64, f64, f64) {
        (self.k11[idx], self.k12[idx], self.k22[idx])
    }

    pub fn len(&self) -> usize {
        self.k11.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k11.is_empty()
    }

    /// Noise coefficients a11, a12, a22 at grid index `t_index`.
    pub fn a_coefficients(
        &self,
        fset: &FundamentalSolutionSet,
        t_index: usize,
    ) -> Result<(f64, f64, f64)> {
        if t_index == 0 {
            return Ok((0.0, 0.0, 0.0));
        }
        if fset.caustic_margin(t_index) < 1e-8 {
            return Err(Error::Caustic { t: fset.time(t_index) });
        }
        let g1t = fset.g1[t_index];
        let r = fset.g2[t_index] / g1t;
        let (k11, k12, k22) = self.k_values(t_index);
        let a11 = 0.5 * (k22 - 2.0 * r * k12 + r * r * k11);
        let a12 = 0.5 * (k12 - r * k11) / g1t;
        let a22 = 0.5 * k11 / (g1t * g1t);
        Ok((a11, a12, a22))
    }
}

/// a coefficients evaluated from the literal double-trapezoid over the
/// sampled boundary solutions v_i (O(t²)); reference implementation.
pub fn a_coefficients_from_boundary(
    bs: &BoundarySolutions,
    kernel: &NoiseKernelCache,
) -> (f64, f64, f64) {
    let m = bs.v1.len();
    let h = kernel.h;
    let pair = |vi: &[f64], vj: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            let wi = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
            let mut inner = 0.0;
            for j in 0..m {
                let wj = if j == 0 || j == m - 1 { 0.5 } else { 1.0 };
                inner += wj * vj[j] * kernel.values[i.abs_diff(j)];
            }
            acc += wi * vi[i] * inner;
        }
        0.5 * acc * h * h
    };
    (pair(&bs.v1, &bs.v1), pair(&bs.v1, &bs.v2), pair(&bs.v2, &bs.v2))
}

/// Friction/boundary coefficients b1..b4 at grid index `t_index`:
/// b1 = u̇1(t,0) + γ, b2 = u̇1(t,t), b3 = u̇2(t,0), b4 = u̇2(t,t).
pub fn b_coefficients(fset: &FundamentalSolutionSet, t_index: usize) -> Result<(f64, f64, f64, f64)> {
    if t_index == 0 || t_index >= fset.len() {
        return Err(Error::Domain(format!(
            "b_coefficients: t index {t_index} outside (0, {})",
            fset.len()
        )));
    }
    if fset.caustic_margin(t_index) < 1e-8 {
        return Err(Error::Caustic { t: fset.time(t_index) });
    }
    let f1t = fset.f1[t_index];
    let rf = fset.f2[t_index] / f1t;
    Ok((
        fset.gamma - rf,
        fset.f2d[t_index] - rf * fset.f1d[t_index],
        1.0 / f1t,
        fset.f1d[t_index] / f1t,
    ))
}

/// Assemble the full coefficient record at one time.
pub fn influence_coefficients(
    builder: &InfluenceBuilder,
    fset: &FundamentalSolutionSet,
    t_index: usize,
) -> Result<InfluenceCoefficients> {
    let (a11, a12, a22) = builder.a_coefficients(fset, t_index)?;
    let (b1, b2, b3, b4) = b_coefficients(fset, t_index)?;
    Ok(InfluenceCoefficients {
        mode: fset.mode,
        t: fset.time(t_index),
        a11,
        a12,
        a22,
        b1,
        b2,
        b3,
        b4,
    })
}

// ---------------------------------------------------------------------------
// diffusion coefficients
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiffusionVariant {
    Exact,
    SmallHbar,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiffusionCoefficients {
    pub d_pp: f64,
    pub d_px: f64,
    pub variant: DiffusionVariant,
}

/// Small-ħ (high temperature) closed forms:
/// D_pp = gθ + 2gΛθ(Ω²(t) − g²), D_px = 2g²Λθ with Λ = 1/(24θ²).
pub fn small_hbar_diffusion(
    config: &SystemConfig,
    mode: Mode,
    t: f64,
) -> Result<DiffusionCoefficients> {
    if config.theta <= 0.0 {
        return Err(Error::Domain(
            "small-ħ diffusion: requires theta > 0 (Λ = 1/(24θ²))".into(),
        ));
    }
    let theta = config.theta;
    let g = config.g;
    let lam = 1.0 / (24.0 * theta * theta);
    let om2 = omega_sq(config, mode, t);
    Ok(DiffusionCoefficients {
        d_pp: g * theta + 2.0 * g * lam * theta * (om2 - g * g),
        d_px: 2.0 * g * g * lam * theta,
        variant: DiffusionVariant::SmallHbar,
    })
}

/// Noise parts of the mode variances (the state-independent inhomogeneous
/// terms 2·a_ij dressed by the propagator weights).
pub fn noise_parts(
    builder: &InfluenceBuilder,
    fset: &FundamentalSolutionSet,
    t_index: usize,
) -> Result<(f64, f64, f64)> {
    let (a11, a12, a22) = builder.a_coefficients(fset, t_index)?;
    let b = fset.f1[t_index];
    let bd = fset.f1d[t_index];
    Ok((
        2.0 * b * b * a11,
        2.0 * (b * bd * a11 + b * a12),
        2.0 * (bd * bd * a11 + 2.0 * bd * a12 + a22),
    ))
}

/// Exact time-convolutionless diffusion coefficients: the residuals that
/// make the noise parts of the variances satisfy the moment ODEs
///   σ̇xp = σpp − Ω²σxx − γσxp + 2D_px,
///   σ̇pp = −2Ω²σxp − 2γσpp + 2D_pp.
/// Time derivatives by centered differences at grid resolution.
pub fn exact_diffusion(
    builder: &InfluenceBuilder,
    fset: &FundamentalSolutionSet,
    config: &SystemConfig,
    t_index: usize,
) -> Result<DiffusionCoefficients> {
    if t_index == 0 || t_index + 1 >= fset.len() {
        return Err(Error::Domain(format!(
            "exact diffusion: t index {t_index} needs interior grid placement"
        )));
    }
    let minus = noise_parts(builder, fset, t_index - 1)?;
    let here = noise_parts(builder, fset, t_index)?;
    let plus = noise_parts(builder, fset, t_index + 1)?;
    let h2 = 2.0 * fset.h;
    let nxx = here.0;
    let nxp = here.1;
    let npp = here.2;
    let nxp_dot = (plus.1 - minus.1) / h2;
    let npp_dot = (plus.2 - minus.2) / h2;
    let om2 = omega_sq(config, fset.mode, fset.time(t_index));
    let gam = fset.gamma;
    Ok(DiffusionCoefficients {
        d_pp: 0.5 * (npp_dot + 2.0 * om2 * nxp + 2.0 * gam * npp),
        d_px: 0.5 * (nxp_dot + om2 * nxx + gam * nxp - npp),
        variant: DiffusionVariant::Exact,
    })
}
