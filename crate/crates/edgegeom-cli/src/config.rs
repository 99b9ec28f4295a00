//! Run configuration: a strict JSON schema that command-line flags overlay
//! field by field, plus the error type that picks the process exit code.

use std::fmt;
use std::path::{Path, PathBuf};

use edgegeom::error::GeomError;
use serde::Deserialize;

/// Exit code 2: the run was misconfigured. Exit code 1: the configuration
/// was well formed but the physics refused it (null edge, off-shell input),
/// or a verification run did not clear its pass gate.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Physics(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Physics(m) => write!(f, "{m}"),
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        if e.is_physics() {
            CliError::Physics(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

/// One run, fully described. Every field is optional so a config file and
/// the flag set can each fill in any subset; flags win on conflicts.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<String>,
    pub family: Option<String>,
    pub metric: Option<String>,
    pub mu: Option<f64>,
    pub mass: Option<f64>,
    pub radius: Option<f64>,
    pub omega0: Option<f64>,
    pub grid: Option<String>,
    pub suite: Option<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub channel: Option<String>,
    pub count: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
    }

    /// Fields set in `flags` replace the file values.
    pub fn overlay(mut self, flags: RunConfig) -> Self {
        macro_rules! take {
            ($field:ident) => {
                if flags.$field.is_some() {
                    self.$field = flags.$field;
                }
            };
        }
        take!(command);
        take!(family);
        take!(metric);
        take!(mu);
        take!(mass);
        take!(radius);
        take!(omega0);
        take!(grid);
        take!(suite);
        take!(seed);
        take!(jobs);
        take!(out);
        take!(tol);
        take!(channel);
        take!(count);
        self
    }
}

/// "AxB" grid spec, e.g. "20x20".
pub fn parse_grid_2d(spec: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Config(format!("grid '{spec}' is not of the form AxB, e.g. 20x20"));
    let (a, b) = spec.split_once('x').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a < 2 || b < 2 {
        return Err(CliError::Config(format!(
            "grid '{spec}' must have at least 2 points per axis"
        )));
    }
    Ok((a, b))
}

/// "lo:hi:count" span spec, e.g. "0.05:0.95:19".
pub fn parse_span(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || {
        CliError::Config(format!(
            "span '{spec}' is not of the form lo:hi:count, e.g. 0.05:0.95:19"
        ))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi, count))
}

/// Evenly spaced points including both ends (a single point sits at lo).
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (count as f64 - 1.0);
    (0..count).map(|i| lo + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_prefers_flags() {
        let file: RunConfig =
            serde_json::from_str(r#"{"radius": 2.0, "seed": 11, "family": "helicoid"}"#).unwrap();
        let flags = RunConfig {
            radius: Some(1.0),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.radius, Some(1.0));
        assert_eq!(merged.seed, Some(11));
        assert_eq!(merged.family.as_deref(), Some("helicoid"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r: Result<RunConfig, _> = serde_json::from_str(r#"{"radius": 1.0, "radish": 2}"#);
        assert!(r.is_err());
    }

    #[test]
    fn grid_and_span_specs() {
        assert_eq!(parse_grid_2d("20x20").unwrap(), (20, 20));
        assert!(parse_grid_2d("20").is_err());
        assert!(parse_grid_2d("1x5").is_err());
        assert_eq!(parse_span("0.05:0.95:19").unwrap(), (0.05, 0.95, 19));
        assert!(parse_span("0.95:0.05:19").is_err());
        assert!(parse_span("0:1").is_err());
        let pts = linspace(0.0, 1.0, 5);
        assert_eq!(pts, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
