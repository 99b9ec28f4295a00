//! Artifact plumbing: convention headers, 17-digit floats, and atomic file
//! writes so an interrupted run never leaves a truncated artifact behind.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::CliError;

/// Sign and orientation conventions every artifact is calibrated to.
pub const CONVENTIONS: [(&str, &str); 4] = [
    ("signature", "mostly-plus (-, +, ..., +)"),
    (
        "curvature-sign",
        "K^i_ab = -g(n^i, D_a e_b); L^I_AB = -g(m^I, D_A f_B)",
    ),
    ("conormal", "outward unit vector eta"),
    ("edge-clock", "proper time, h_uu = -1"),
];

/// The same block as a serializable JSON object.
#[derive(Serialize)]
pub struct Conventions {
    pub signature: &'static str,
    pub curvature_sign: &'static str,
    pub conormal: &'static str,
    pub edge_clock: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            signature: CONVENTIONS[0].1,
            curvature_sign: CONVENTIONS[1].1,
            conormal: CONVENTIONS[2].1,
            edge_clock: CONVENTIONS[3].1,
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comment header for CSV artifacts: tool line, conventions, then the
/// resolved parameters of the run in the given order.
pub fn csv_header(command: &str, params: &[(&str, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# edgegeom {} {command}", env!("CARGO_PKG_VERSION"));
    for (k, v) in CONVENTIONS {
        let _ = writeln!(s, "# {k}: {v}");
    }
    for (k, v) in params {
        let _ = writeln!(s, "# {k}: {v}");
    }
    s
}

/// What a command hands back to main: the artifact body, a one-line summary
/// for stderr, and whether the run's own gate passed.
pub struct Artifact {
    pub text: String,
    pub summary: String,
    pub ok: bool,
}

impl Artifact {
    pub fn passing(text: String, summary: String) -> Self {
        Artifact {
            text,
            summary,
            ok: true,
        }
    }
}

/// Write to `out` via a temp file and rename, or to stdout when no path is
/// given.
pub fn write_artifact(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
        Some(path) => {
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".tmp");
            let tmp = std::path::PathBuf::from(tmp);
            std::fs::write(&tmp, text.as_bytes()).map_err(|e| {
                CliError::Config(format!("cannot write {}: {e}", tmp.display()))
            })?;
            std::fs::rename(&tmp, path).map_err(|e| {
                CliError::Config(format!("cannot move artifact onto {}: {e}", path.display()))
            })?;
            Ok(())
        }
    }
}
