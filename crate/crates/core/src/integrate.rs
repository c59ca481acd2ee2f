//! Shared fixed-grid ODE integration based on the Dormand–Prince 5(4)
//! embedded Runge–Kutta pair.
//!
//! The solvers downstream need solutions sampled on a fixed uniform grid
//! (the kernel double sums are built on it), so the driver steps from grid
//! point to grid point and subdivides a step only when the embedded error
//! estimate exceeds the local tolerance.

use crate::error::{Error, Result};

/// Local error tolerance (relative, with an absolute floor at the same level).
pub const LOCAL_TOL: f64 = 1e-10;

const MAX_SUBDIV: u32 = 20;

/// One Dormand–Prince 5(4) step; returns (y_next, error_estimate_norm / scale).
fn dp45_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], f64) {
    let k1 = f(t, y);

    let mut y2 = *y;
    for i in 0..N {
        y2[i] += h * 0.2 * k1[i];
    }
    let k2 = f(t + 0.2 * h, &y2);

    let mut y3 = *y;
    for i in 0..N {
        y3[i] += h * (3.0 / 40.0 * k1[i] + 9.0 / 40.0 * k2[i]);
    }
    let k3 = f(t + 0.3 * h, &y3);

    let mut y4 = *y;
    for i in 0..N {
        y4[i] += h * (44.0 / 45.0 * k1[i] - 56.0 / 15.0 * k2[i] + 32.0 / 9.0 * k3[i]);
    }
    let k4 = f(t + 0.8 * h, &y4);

    let mut y5 = *y;
    for i in 0..N {
        y5[i] += h
            * (19372.0 / 6561.0 * k1[i] - 25360.0 / 2187.0 * k2[i] + 64448.0 / 6561.0 * k3[i]
                - 212.0 / 729.0 * k4[i]);
    }
    let k5 = f(t + 8.0 / 9.0 * h, &y5);

    let mut y6 = *y;
    for i in 0..N {
        y6[i] += h
            * (9017.0 / 3168.0 * k1[i] - 355.0 / 33.0 * k2[i] + 46732.0 / 5247.0 * k3[i]
                + 49.0 / 176.0 * k4[i]
                - 5103.0 / 18656.0 * k5[i]);
    }
    let k6 = f(t + h, &y6);

    // 5th-order solution
    let mut out = *y;
    for i in 0..N {
        out[i] += h
            * (35.0 / 384.0 * k1[i] + 500.0 / 1113.0 * k3[i] + 125.0 / 192.0 * k4[i]
                - 2187.0 / 6784.0 * k5[i]
                + 11.0 / 84.0 * k6[i]);
    }
    let k7 = f(t + h, &out);

    // embedded 4th-order estimate
    let mut err = 0.0f64;
    let mut scale = 1e-30f64;
    for i in 0..N {
        let e4 = h
            * (5179.0 / 57600.0 * k1[i] + 7571.0 / 16695.0 * k3[i] + 393.0 / 640.0 * k4[i]
                - 92097.0 / 339200.0 * k5[i]
                + 187.0 / 2100.0 * k6[i]
                + 1.0 / 40.0 * k7[i]);
        let d = (out[i] - (y[i] + e4)).abs();
        err = err.max(d);
        scale = scale.max(y[i].abs().max(out[i].abs()));
    }
    (out, err / scale.max(1.0e-12))
}

/// Advance from t to t + h, subdividing until the per-step error estimate
/// meets `LOCAL_TOL`.
pub fn advance<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N]> {
    let mut sub = 1u64;
    for attempt in 0..=MAX_SUBDIV {
        let hs = h / sub as f64;
        let mut cur = *y;
        let mut tc = t;
        let mut ok = true;
        for _ in 0..sub {
            let (next, err) = dp45_step(f, tc, &cur, hs);
            if err > LOCAL_TOL {
                ok = false;
                break;
            }
            cur = next;
            tc += hs;
        }
        if ok {
            return Ok(cur);
        }
        if attempt == MAX_SUBDIV {
            break;
        }
        sub *= 2;
    }
    Err(Error::Integration { t, msg: "step-size collapse: local tolerance unreachable".into() })
}

/// Integrate over a uniform grid of `n` steps of size `h`, recording the
/// state at every grid point (n + 1 samples including the initial one).
pub fn integrate_grid<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    h: f64,
    n: usize,
) -> Result<Vec<[f64; N]>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(y0);
    let mut y = y0;
    for k in 0..n {
        y = advance(f, k as f64 * h, &y, h)?;
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_oscillator_accuracy() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let h = 2.0 * std::f64::consts::PI / 2048.0;
        let sol = integrate_grid(&f, [0.0, 1.0], h, 4096).unwrap();
        for (k, y) in sol.iter().enumerate() {
            let t = k as f64 * h;
            assert!((y[0] - t.sin()).abs() < 1e-9, "t={t} err={}", (y[0] - t.sin()).abs());
        }
    }

    #[test]
    fn exponential_convergence_order() {
        // a single unsubdivided step should show ~5th-order accuracy
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let mut errs = Vec::new();
        for h in [0.1, 0.05] {
            let (y, _) = super::dp45_step(&f, 0.0, &[1.0], h);
            errs.push((y[0] - h.exp()).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 5.0, "observed order {order}");
    }

    #[test]
    fn stiff_request_subdivides() {
        // large step relative to the oscillation: driver must subdivide, not fail
        let f = |_t: f64, y: &[f64; 2]| [y[1], -100.0 * y[0]];
        let y = advance(&f, 0.0, &[1.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(y[0], (10.0f64).cos(), epsilon = 1e-7);
    }
}
