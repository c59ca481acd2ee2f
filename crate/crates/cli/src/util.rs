//! Config resolution, scan-axis parsing and deterministic number formatting.

use std::fmt;
use std::path::Path;

use parabath_core::{Error as CoreError, SystemConfig};

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    Usage(String),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Load the config file (if given), then apply --set overrides in order.
pub fn resolve_config(path: Option<&Path>, overrides: &[String]) -> Result<SystemConfig> {
    let mut config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            SystemConfig::parse(&text)?
        }
        None => SystemConfig::default(),
    };
    for kv in overrides {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        config.set(key.trim(), value.trim())?;
    }
    config.validate()?;
    Ok(config)
}

/// One scan axis parsed from "name=min:max:count".
#[derive(Debug, Clone)]
pub struct ScanAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl ScanAxis {
    pub fn parse(s: &str) -> Result<ScanAxis> {
        let (name, rest) = s
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--scan expects NAME=MIN:MAX:COUNT, got '{s}'")))?;
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!(
                "--scan expects NAME=MIN:MAX:COUNT, got '{s}'"
            )));
        }
        let min: f64 = parts[0]
            .parse()
            .map_err(|_| CliError::Usage(format!("bad scan minimum '{}'", parts[0])))?;
        let max: f64 = parts[1]
            .parse()
            .map_err(|_| CliError::Usage(format!("bad scan maximum '{}'", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| CliError::Usage(format!("bad scan count '{}'", parts[2])))?;
        if count < 2 {
            return Err(CliError::Usage("scan count must be at least 2".into()));
        }
        if !(max > min) {
            return Err(CliError::Usage("scan range must be nonempty (max > min)".into()));
        }
        Ok(ScanAxis { name: name.trim().to_string(), min, max, count })
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + step * i as f64).collect()
    }
}

/// Pick the axis with the given name out of the parsed scan flags, or fall
/// back to a default range.
pub fn axis_or_default(
    scans: &[String],
    name: &str,
    default: (f64, f64, usize),
) -> Result<ScanAxis> {
    for s in scans {
        let axis = ScanAxis::parse(s)?;
        if axis.name == name {
            return Ok(axis);
        }
    }
    Ok(ScanAxis { name: name.to_string(), min: default.0, max: default.1, count: default.2 })
}

/// Reject scan flags naming axes the command does not understand.
pub fn check_axes(scans: &[String], allowed: &[&str]) -> Result<()> {
    for s in scans {
        let axis = ScanAxis::parse(s)?;
        if !allowed.contains(&axis.name.as_str()) {
            return Err(CliError::Usage(format!(
                "unknown scan axis '{}' (expected one of: {})",
                axis.name,
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

/// 17 significant digits: enough to round-trip any f64, and deterministic.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}
