use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit codes:
/// configuration problems, numerical failures (caustics, divergence,
/// kernel accuracy) and oracle mismatches are kept distinguishable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// f1(t) (equivalently g1(t)) vanishes at this time; the two-point
    /// boundary problem is singular there and callers must shift the
    /// evaluation time.
    #[error("caustic at t = {t:.6}: fundamental solution f1 vanishes; shift the evaluation time")]
    Caustic { t: f64 },

    #[error("integration failure at t = {t:.6}: {msg}")]
    Integration { t: f64, msg: String },

    #[error("noise kernel accuracy: evaluation methods disagree by {rel:.3e} (relative) at s = {s:.6}")]
    KernelAccuracy { s: f64, rel: f64 },

    #[error("covariance diverged during period {period}: norm {norm:.3e} exceeds the overflow guard")]
    Divergence { period: usize, norm: f64 },

    #[error(
        "bath recurrence time {t_rec:.2} is shorter than the requested horizon {horizon:.2}; \
         increase the bath mode count"
    )]
    Recurrence { t_rec: f64, horizon: f64 },

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
