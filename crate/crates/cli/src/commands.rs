//! Implementations of the six subcommands.

use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use parabath_core::dynamics::{evolve_full, evolve_until_steady, steady_state};
use parabath_core::floquet::{floquet_exponent, FloquetExponent};
use parabath_core::gaussian::{lab_to_normal, normal_to_lab, CovarianceMatrix, ModeCovariance};
use parabath_core::oracles::{discretize_bath, evolve_closed, qme_evolve_mode, QmeVariant};
use parabath_core::{Error as CoreError, Mode, SystemConfig};

use crate::util::{axis_or_default, check_axes, fmt_f64, write_file, CliError, Result};

/// 2022 CODATA (exact) Planck and Boltzmann constants.
const PLANCK: f64 = 6.626_070_15e-34;
const BOLTZMANN: f64 = 1.380_649e-23;

fn parse_initial(config: &SystemConfig, spec: &str) -> Result<(CovarianceMatrix, String)> {
    let lower = spec.trim().to_ascii_lowercase();
    let state = if lower == "thermal" {
        CovarianceMatrix::thermal_product(config.theta)?
    } else if lower == "vacuum" {
        CovarianceMatrix::thermal_product(0.0)?
    } else if lower == "gibbs" {
        CovarianceMatrix::gibbs(config.theta, config.kappa0)?
    } else if let Some(r) = lower.strip_prefix("tmsv:") {
        let r: f64 = r
            .parse()
            .map_err(|_| CliError::Usage(format!("bad squeezing parameter in '{spec}'")))?;
        CovarianceMatrix::two_mode_squeezed(r)
    } else {
        return Err(CliError::Usage(format!(
            "unknown initial state '{spec}' (expected thermal | vacuum | tmsv:R | gibbs)"
        )));
    };
    Ok((state, lower))
}

fn floquet_json(e: &FloquetExponent) -> serde_json::Value {
    json!({
        "mu_re": e.mu_re,
        "mu_im": e.mu_im,
        "growth_rate": e.growth_rate,
        "stable": e.stable,
    })
}

/// Max of the two modes' parametric growth rates.
fn growth_rate(config: &SystemConfig) -> Result<f64> {
    let p = floquet_exponent(config, Mode::Plus)?;
    let m = floquet_exponent(config, Mode::Minus)?;
    Ok(p.growth_rate.max(m.growth_rate))
}

/// Horizon (in drive periods) long enough for dissipative relaxation at
/// rate γ, kept within a desk-scale memory/time budget.
fn relaxation_periods(g: f64, drive_period: f64) -> f64 {
    (8.0 / (g * drive_period)).ceil().clamp(60.0, 1200.0)
}

const UPPER_TRIANGLE: [(usize, usize); 10] =
    [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

pub fn simulate(config: &SystemConfig, initial: &str, out: &Path, json_format: bool) -> Result<()> {
    let (init, init_label) = parse_initial(config, initial)?;
    let traj = evolve_full(config, &init)?;
    let report = steady_state(&traj, 1e-3, 10);

    let exp_plus = floquet_exponent(config, Mode::Plus)?;
    let exp_minus = floquet_exponent(config, Mode::Minus)?;
    let theta_analytic = if config.g > 0.0 {
        Some(exp_plus.growth_rate.max(exp_minus.growth_rate) / config.g)
    } else {
        None
    };

    if json_format {
        let rows: Vec<serde_json::Value> = (0..traj.times.len())
            .map(|i| {
                let cov: Vec<f64> =
                    UPPER_TRIANGLE.iter().map(|&(r, c)| traj.cov[i].matrix()[(r, c)]).collect();
                json!({
                    "t": traj.times[i],
                    "e_n": traj.entanglement[i].log_negativity,
                    "cov": cov,
                    "plus": [traj.plus[i].sxx, traj.plus[i].sxp, traj.plus[i].spp],
                    "minus": [traj.minus[i].sxx, traj.minus[i].sxp, traj.minus[i].spp],
                })
            })
            .collect();
        write_file(out, "trajectory.json", &serde_json::to_string_pretty(&rows).unwrap())?;
    } else {
        let mut csv = String::from(
            "t (1/omega),E_N (log2),\
             cov_q1q1 (x_zp^2),cov_q1q2 (x_zp^2),cov_q1p1 (hbar),cov_q1p2 (hbar),\
             cov_q2q2 (x_zp^2),cov_q2p1 (hbar),cov_q2p2 (hbar),\
             cov_p1p1 (p_zp^2),cov_p1p2 (p_zp^2),cov_p2p2 (p_zp^2),\
             sxx_plus (x_zp^2),sxp_plus (hbar),spp_plus (p_zp^2),\
             sxx_minus (x_zp^2),sxp_minus (hbar),spp_minus (p_zp^2)\n",
        );
        for i in 0..traj.times.len() {
            let mut fields = vec![fmt_f64(traj.times[i]), fmt_f64(traj.entanglement[i].log_negativity)];
            for &(r, c) in &UPPER_TRIANGLE {
                fields.push(fmt_f64(traj.cov[i].matrix()[(r, c)]));
            }
            for mc in [&traj.plus[i], &traj.minus[i]] {
                fields.push(fmt_f64(mc.sxx));
                fields.push(fmt_f64(mc.sxp));
                fields.push(fmt_f64(mc.spp));
            }
            csv.push_str(&fields.join(","));
            csv.push('\n');
        }
        write_file(out, "trajectory.csv", &csv)?;
    }

    let summary = json!({
        "config": config,
        "initial": init_label,
        "samples": traj.times.len(),
        "shifted_samples": traj.shifted_samples,
        "diverged_at_period": traj.diverged_at_period,
        "steady": report,
        "floquet": { "plus": floquet_json(&exp_plus), "minus": floquet_json(&exp_minus) },
        "theta_analytic": theta_analytic,
    });
    write_file(out, "summary.json", &serde_json::to_string_pretty(&summary).unwrap())?;
    println!(
        "steady E_N = {:.6} (converged: {}), theta_analytic = {}",
        report.log_negativity,
        report.converged,
        theta_analytic.map_or("n/a".into(), |t| format!("{t:.4}")),
    );
    Ok(())
}

/// Steady E_N at one (config, θ) point; errors at a grid point become a
/// status string rather than aborting the scan.
fn steady_en_at(base: &SystemConfig, theta: f64, window: usize) -> (f64, bool, &'static str) {
    let mut cfg = base.clone();
    cfg.theta = theta;
    cfg.horizon = relaxation_periods(cfg.g, cfg.drive_period());
    let init = match CovarianceMatrix::thermal_product(theta) {
        Ok(s) => s,
        Err(_) => return (0.0, false, "error"),
    };
    match evolve_until_steady(&cfg, &init, 1e-3, window) {
        Ok((_, report)) => {
            let status = if report.converged { "ok" } else { "nonconverged" };
            (report.log_negativity, report.converged, status)
        }
        Err(_) => (0.0, false, "error"),
    }
}

pub fn boundary(
    config: &SystemConfig,
    scans: &[String],
    epsilon: f64,
    depth: usize,
    window: usize,
    out: &Path,
) -> Result<()> {
    check_axes(scans, &["kappa1"])?;
    if config.g <= 0.0 {
        return Err(CoreError::Config("boundary scan requires g > 0".into()).into());
    }
    let axis = axis_or_default(scans, "kappa1", (0.05, 0.5, 10))?;

    let mut rows = Vec::new();
    for kappa1 in axis.values() {
        let mut cfg = config.clone();
        cfg.kappa1 = kappa1;
        let growth = growth_rate(&cfg)?;
        let theta_analytic = growth / cfg.g;

        let lo_theta = 0.1;
        let hi_theta = 2.0 * theta_analytic + 10.0;
        let entangled = |theta: f64| {
            let (en, _conv, status) = steady_en_at(&cfg, theta, window);
            (en > epsilon, status)
        };

        let mut flagged = false;
        let (lo_ent, s) = entangled(lo_theta);
        flagged |= s != "ok";
        let (theta_sim, status) = if !lo_ent {
            (0.0, "below-range")
        } else {
            let (hi_ent, s) = entangled(hi_theta);
            flagged |= s != "ok";
            if hi_ent {
                (hi_theta, "above-range")
            } else {
                let (mut lo, mut hi) = (lo_theta, hi_theta);
                for _ in 0..depth {
                    let mid = 0.5 * (lo + hi);
                    let (ent, s) = entangled(mid);
                    flagged |= s != "ok";
                    if ent {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0.5 * (lo + hi), "ok")
            }
        };
        let status = if flagged && status == "ok" { "flagged" } else { status };
        println!(
            "kappa1 = {kappa1:.4}: theta_sim = {theta_sim:.4}, theta_analytic = {theta_analytic:.4} [{status}]"
        );
        rows.push((kappa1, growth, theta_analytic, theta_sim, status));
    }

    let mut csv = String::from(
        "kappa1 (dimensionless),growth_rate (omega),theta_analytic (kT/hbar*omega),theta_sim (kT/hbar*omega),status\n",
    );
    for (kappa1, growth, ta, ts, status) in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(*kappa1),
            fmt_f64(*growth),
            fmt_f64(*ta),
            fmt_f64(*ts),
            status
        ));
    }
    write_file(out, "boundary.csv", &csv)?;
    Ok(())
}

pub fn equilibrium(config: &SystemConfig, scans: &[String], out: &Path) -> Result<()> {
    check_axes(scans, &["theta", "kappa0"])?;
    if config.kappa1 != 0.0 {
        return Err(CoreError::Config(
            "equilibrium diagram requires kappa1 = 0 (no driving)".into(),
        )
        .into());
    }
    let theta_axis = axis_or_default(scans, "theta", (0.05, 2.0, 40))?;
    let kappa0_axis = axis_or_default(scans, "kappa0", (0.0, 0.95, 20))?;

    let gibbs_en = |theta: f64, kappa0: f64| -> Option<f64> {
        let cov = CovarianceMatrix::gibbs(theta, kappa0).ok()?;
        parabath_core::gaussian::log_negativity(&cov).ok().map(|e| e.log_negativity)
    };

    let mut csv = String::from(
        "theta (kT/hbar*omega),kappa0 (dimensionless),E_N (log2),status\n",
    );
    for &kappa0 in &kappa0_axis.values() {
        for &theta in &theta_axis.values() {
            match gibbs_en(theta, kappa0) {
                Some(en) => csv.push_str(&format!(
                    "{},{},{},ok\n",
                    fmt_f64(theta),
                    fmt_f64(kappa0),
                    fmt_f64(en)
                )),
                None => csv.push_str(&format!(
                    "{},{},{},invalid\n",
                    fmt_f64(theta),
                    fmt_f64(kappa0),
                    fmt_f64(f64::NAN)
                )),
            }
        }
    }
    write_file(out, "equilibrium.csv", &csv)?;

    // E_N = 0 contour: largest θ with E_N > 0, refined by bisection
    let mut contour = String::from("kappa0 (dimensionless),theta_boundary (kT/hbar*omega)\n");
    for &kappa0 in &kappa0_axis.values() {
        if kappa0 <= 0.0 || kappa0 >= 1.0 {
            continue;
        }
        let (mut lo, mut hi) = (1e-4, 5.0);
        if gibbs_en(lo, kappa0).map_or(true, |e| e <= 0.0) {
            contour.push_str(&format!("{},{}\n", fmt_f64(kappa0), fmt_f64(0.0)));
            continue;
        }
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if gibbs_en(mid, kappa0).is_some_and(|e| e > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        contour.push_str(&format!("{},{}\n", fmt_f64(kappa0), fmt_f64(0.5 * (lo + hi))));
    }
    write_file(out, "equilibrium_boundary.csv", &contour)?;
    Ok(())
}

pub fn exponent(config: &SystemConfig, scans: &[String], out: &Path) -> Result<()> {
    check_axes(scans, &["kappa1", "delta"])?;
    let kappa1_axis = axis_or_default(scans, "kappa1", (0.0, 0.6, 25))?;
    let delta_axis = axis_or_default(scans, "delta", (1.5, 2.5, 41))?;

    let kappa1_values = kappa1_axis.values();
    let delta_values = delta_axis.values();
    let mut grid = Vec::with_capacity(kappa1_values.len() * delta_values.len());
    for &k in &kappa1_values {
        for &d in &delta_values {
            grid.push((grid.len(), k, d));
        }
    }

    let mut rows: Vec<(usize, String)> = grid
        .par_iter()
        .map(|&(idx, kappa1, delta)| {
            let mut cfg = config.clone();
            cfg.kappa1 = kappa1;
            cfg.delta = delta;
            let line = match (floquet_exponent(&cfg, Mode::Plus), floquet_exponent(&cfg, Mode::Minus))
            {
                (Ok(p), Ok(m)) => format!(
                    "{},{},{},{},{},{}\n",
                    fmt_f64(kappa1),
                    fmt_f64(delta),
                    fmt_f64(p.growth_rate),
                    fmt_f64(m.growth_rate),
                    p.stable,
                    m.stable
                ),
                _ => format!(
                    "{},{},{},{},error,error\n",
                    fmt_f64(kappa1),
                    fmt_f64(delta),
                    fmt_f64(f64::NAN),
                    fmt_f64(f64::NAN)
                ),
            };
            (idx, line)
        })
        .collect();
    rows.sort_by_key(|r| r.0);

    let mut csv = String::from(
        "kappa1 (dimensionless),delta (omega_d/omega),growth_plus (omega),growth_minus (omega),stable_plus,stable_minus\n",
    );
    for (_, line) in rows {
        csv.push_str(&line);
    }
    write_file(out, "exponent.csv", &csv)?;
    Ok(())
}

/// Period-averaged mode covariance over the last complete drive period of a
/// sampled trajectory.
fn period_average(covs: &[ModeCovariance], times: &[f64], td: f64) -> ModeCovariance {
    let t_end = *times.last().unwrap();
    let lo = t_end - td;
    let mut acc = (0.0, 0.0, 0.0);
    let mut n = 0.0;
    for (c, &t) in covs.iter().zip(times) {
        if t > lo {
            acc.0 += c.sxx;
            acc.1 += c.sxp;
            acc.2 += c.spp;
            n += 1.0;
        }
    }
    ModeCovariance { mode: covs[0].mode, sxx: acc.0 / n, sxp: acc.1 / n, spp: acc.2 / n }
}

pub fn oracle_compare(config: &SystemConfig, out: &Path) -> Result<()> {
    let mut failures = Vec::new();

    // --- exact propagator vs discretized bath, elementwise on the lab
    // covariance over a recurrence-safe window
    let bath_window = config.horizon_time().min(20.0);
    let mut cfg_bath = config.clone();
    cfg_bath.horizon = bath_window / config.drive_period();
    let init = CovarianceMatrix::thermal_product(config.theta)?;
    let traj = evolve_full(&cfg_bath, &init)?;
    let times: Vec<f64> = traj
        .times
        .iter()
        .cloned()
        .filter(|&t| t >= 0.1 && t <= bath_window)
        .collect();
    let n_modes = (((config.cutoff * bath_window / std::f64::consts::PI).ceil() as usize) + 2)
        .max(320);
    let bath = discretize_bath(&cfg_bath, n_modes)?;
    let (init_p, init_m, _) = lab_to_normal(&init);
    let bath_plus = evolve_closed(&cfg_bath, Mode::Plus, &bath, &init_p, &times)?;
    let bath_minus = evolve_closed(&cfg_bath, Mode::Minus, &bath, &init_m, &times)?;
    let zero = nalgebra::Matrix2::zeros();
    let mut max_dev: f64 = 0.0;
    let mut k = 0;
    for (i, &t) in traj.times.iter().enumerate() {
        if t < 0.1 || t > bath_window {
            continue;
        }
        let bath_cov = normal_to_lab(&bath_plus[k], &bath_minus[k], &zero);
        // Normalize by the covariance scale (floored at the vacuum scale):
        // under resonant driving the state is amplified and any fixed model
        // difference grows with it, so a bare absolute deviation would just
        // measure the amplification.
        let scale = traj.cov[i].matrix().abs().max().max(1.0);
        let dev = (bath_cov.matrix() - traj.cov[i].matrix()).abs().max() / scale;
        max_dev = max_dev.max(dev);
        k += 1;
    }
    let bath_tol = 1e-2;
    let bath_pass = max_dev < bath_tol;
    if !bath_pass {
        failures.push(format!("exact vs bath: max deviation {max_dev:.3e} ≥ {bath_tol:.0e}"));
    }
    let exact_vs_bath = json!({
        "window": [0.1, bath_window],
        "bath_modes": n_modes,
        "max_deviation": max_dev,
        "normalization": "elementwise / max(1, max|cov|)",
        "tolerance": bath_tol,
        "pass": bath_pass,
    });

    // --- exact vs small-ħ master equation, steady covariance (valid at
    // high temperature)
    let qme_domain = config.theta >= 50.0;
    let mut cfg_steady = config.clone();
    cfg_steady.horizon = relaxation_periods(config.g.max(1e-4), config.drive_period());
    let (exact_traj, _report) = evolve_until_steady(&cfg_steady, &init, 1e-3, 10)?;
    let td = config.drive_period();
    let (init_p, init_m, _) = lab_to_normal(&init);
    let qme_grid = exact_traj.times.clone();
    let qme_plus = qme_evolve_mode(&cfg_steady, Mode::Plus, QmeVariant::SmallHbar, &init_p, &qme_grid)?;
    let qme_minus =
        qme_evolve_mode(&cfg_steady, Mode::Minus, QmeVariant::SmallHbar, &init_m, &qme_grid)?;
    let mut qme_dev: f64 = 0.0;
    for (exact_mode, qme_mode) in
        [(&exact_traj.plus, &qme_plus), (&exact_traj.minus, &qme_minus)]
    {
        let ex = period_average(exact_mode, &exact_traj.times, td);
        let qm = period_average(qme_mode, &qme_grid, td);
        let floor = 0.01 * config.theta.max(1.0);
        for (a, b) in [(ex.sxx, qm.sxx), (ex.sxp, qm.sxp), (ex.spp, qm.spp)] {
            qme_dev = qme_dev.max((a - b).abs() / a.abs().max(floor));
        }
    }
    let qme_tol = 0.02;
    let qme_pass = qme_dev < qme_tol;
    if qme_domain && !qme_pass {
        failures.push(format!("exact vs small-ħ QME: max deviation {qme_dev:.3e} ≥ {qme_tol}"));
    }
    let exact_vs_qme = json!({
        "max_relative_deviation": qme_dev,
        "tolerance": qme_tol,
        "in_domain": qme_domain,
        "pass": if qme_domain { json!(qme_pass) } else { json!("out-of-domain") },
    });

    // --- small-ħ vs classical equipartition, undriven
    let cl_domain = config.theta >= 100.0;
    let mut cfg_cl = config.clone();
    cfg_cl.kappa1 = 0.0;
    cfg_cl.horizon = relaxation_periods(config.g.max(1e-4), config.drive_period());
    let t_final = cfg_cl.horizon_time();
    let init_mode = ModeCovariance::thermal(Mode::Plus, config.theta);
    let grid = [t_final * 0.9, t_final];
    let mut cl_dev: f64 = 0.0;
    let mut sh_equip_dev: f64 = 0.0;
    if config.theta > 0.0 {
        let sh = qme_evolve_mode(&cfg_cl, Mode::Plus, QmeVariant::SmallHbar, &init_mode, &grid)?;
        let cl = qme_evolve_mode(&cfg_cl, Mode::Plus, QmeVariant::Classical, &init_mode, &grid)?;
        let last_sh = sh.last().unwrap();
        let last_cl = cl.last().unwrap();
        cl_dev = (last_sh.sxx - last_cl.sxx).abs() / last_cl.sxx.abs().max(1e-300);
        sh_equip_dev = (last_sh.sxx - config.theta).abs() / config.theta;
    }
    let cl_tol = 0.01;
    let cl_pass = cl_dev < cl_tol && sh_equip_dev < cl_tol;
    if cl_domain && !cl_pass {
        failures.push(format!(
            "small-ħ vs classical: deviation {cl_dev:.3e}, equipartition residual {sh_equip_dev:.3e} ≥ {cl_tol}"
        ));
    }
    let qme_vs_classical = json!({
        "sxx_relative_deviation": cl_dev,
        "equipartition_residual": sh_equip_dev,
        "tolerance": cl_tol,
        "in_domain": cl_domain,
        "pass": if cl_domain { json!(cl_pass) } else { json!("out-of-domain") },
    });

    let doc = json!({
        "config": config,
        "exact_vs_bath": exact_vs_bath,
        "exact_vs_qme": exact_vs_qme,
        "qme_vs_classical": qme_vs_classical,
        "failures": failures,
    });
    write_file(out, "oracle_compare.json", &serde_json::to_string_pretty(&doc).unwrap())?;
    if failures.is_empty() {
        println!("all in-domain oracle pairs agree");
        Ok(())
    } else {
        Err(CoreError::OracleMismatch(failures.join("; ")).into())
    }
}

#[allow(clippy::too_many_arguments)]
pub fn units(
    config: &SystemConfig,
    frequency: Option<f64>,
    theta: Option<f64>,
    temperature: Option<f64>,
    mass: Option<f64>,
    size: Option<f64>,
    out: &Path,
) -> Result<()> {
    let nu = frequency.ok_or_else(|| {
        CliError::Usage("units: --frequency (Hz) is required".into())
    })?;
    if nu <= 0.0 {
        return Err(CliError::Usage("units: frequency must be positive".into()));
    }
    let quantum = PLANCK * nu; // ħω with ω = 2πν
    let theta_value = match (theta, temperature) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "units: give either --theta or --temperature, not both".into(),
            ))
        }
        (Some(t), None) => t,
        (None, Some(kelvin)) => kelvin * BOLTZMANN / quantum,
        (None, None) => config.theta,
    };
    if theta_value < 0.0 {
        return Err(CliError::Usage("units: theta must be non-negative".into()));
    }
    let kelvin = theta_value * quantum / BOLTZMANN;

    let mut doc = json!({
        "frequency_hz": nu,
        "theta": theta_value,
        "temperature_k": kelvin,
        "energy_quantum_j": quantum,
    });
    if let Some(m) = mass {
        if m <= 0.0 {
            return Err(CliError::Usage("units: mass must be positive".into()));
        }
        let omega = 2.0 * std::f64::consts::PI * nu;
        let hbar = PLANCK / (2.0 * std::f64::consts::PI);
        let x_scale = (hbar / (m * omega)).sqrt();
        // thermal equilibrium spread √σxx in natural units, scaled to meters
        let sxx = 0.5 * parabath_core::gaussian::thermal_factor(1.0, theta_value);
        let spread = sxx.sqrt() * x_scale;
        doc["length_scale_m"] = json!(x_scale);
        doc["thermal_position_spread_m"] = json!(spread);
        if let Some(l) = size {
            if l <= 0.0 {
                return Err(CliError::Usage("units: size must be positive".into()));
            }
            doc["trap_size_margin"] = json!(l / spread);
        }
    }
    write_file(out, "units.json", &serde_json::to_string_pretty(&doc).unwrap())?;
    println!("theta = {theta_value} ↔ T = {kelvin} K at {nu} Hz");
    Ok(())
}
