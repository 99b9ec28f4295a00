//! Metric charts selectable by name, including `custom:<file>` tables whose
//! components are closed-form expressions of the coordinates.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use edgegeom::spacetime::{ChartDomain, MetricProvider};
use nalgebra::DMatrix;
use serde::Deserialize;

use crate::config::CliError;
use crate::expr::{self, Expr};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricTable {
    #[serde(default)]
    name: Option<String>,
    coordinates: Vec<String>,
    /// Full symmetric matrix of expressions, row major.
    components: Vec<Vec<String>>,
    #[serde(default)]
    constant: bool,
    /// Chart box per coordinate name; null means unbounded on that side.
    #[serde(default)]
    bounds: HashMap<String, (Option<f64>, Option<f64>)>,
}

/// Resolve a metric spec: a built-in name or `custom:<file>`.
pub fn provider_by_name(spec: &str) -> Result<MetricProvider, CliError> {
    match spec {
        "minkowski-cartesian" => Ok(MetricProvider::minkowski_cartesian(4)),
        "minkowski-cylindrical" => Ok(MetricProvider::minkowski_cylindrical()),
        "sphere-block" => Ok(MetricProvider::sphere_block()),
        other => {
            if let Some(path) = other.strip_prefix("custom:") {
                provider_from_table(Path::new(path))
            } else {
                Err(CliError::Config(format!(
                    "unknown metric '{other}'; choose minkowski-cartesian, \
                     minkowski-cylindrical, sphere-block, or custom:<file>"
                )))
            }
        }
    }
}

/// A point inside the chart to probe the table at: bounded axes use their
/// midpoint, unbounded ones sit at 1 to stay clear of coordinate axes.
pub fn chart_anchor(domain: &ChartDomain) -> Vec<f64> {
    domain
        .lo
        .iter()
        .zip(domain.hi.iter())
        .map(|(lo, hi)| {
            if lo.is_finite() && hi.is_finite() {
                0.5 * (lo + hi)
            } else if lo.is_finite() {
                lo + 1.0
            } else if hi.is_finite() {
                hi - 1.0
            } else {
                1.0
            }
        })
        .collect()
}

fn provider_from_table(path: &Path) -> Result<MetricProvider, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read metric table {}: {e}", path.display())))?;
    let table: MetricTable = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("cannot parse metric table {}: {e}", path.display())))?;

    let dim = table.coordinates.len();
    if dim == 0 {
        return Err(CliError::Config("metric table declares no coordinates".into()));
    }
    if table.components.len() != dim || table.components.iter().any(|row| row.len() != dim) {
        return Err(CliError::Config(format!(
            "metric table components must form a {dim}x{dim} matrix"
        )));
    }

    let mut exprs: Vec<Vec<Expr>> = Vec::with_capacity(dim);
    for (i, row) in table.components.iter().enumerate() {
        let mut out = Vec::with_capacity(dim);
        for (j, src) in row.iter().enumerate() {
            let e = expr::parse(src, &table.coordinates).map_err(|m| {
                CliError::Config(format!("component ({i},{j}) of {}: {m}", path.display()))
            })?;
            if table.constant && e.uses_vars() {
                return Err(CliError::Config(format!(
                    "metric table {} is declared constant but component ({i},{j}) \
                     reads a coordinate",
                    path.display()
                )));
            }
            out.push(e);
        }
        exprs.push(out);
    }

    let mut domain = ChartDomain::unbounded(dim);
    for (name, (lo, hi)) in &table.bounds {
        let idx = table
            .coordinates
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| {
                CliError::Config(format!("bounds name '{name}' is not a declared coordinate"))
            })?;
        if let Some(v) = lo {
            domain.lo[idx] = *v;
        }
        if let Some(v) = hi {
            domain.hi[idx] = *v;
        }
        if domain.lo[idx] >= domain.hi[idx] {
            return Err(CliError::Config(format!(
                "bounds for '{name}' are empty: [{}, {}]",
                domain.lo[idx], domain.hi[idx]
            )));
        }
    }

    let probe = chart_anchor(&domain);
    let mut scale = 0.0f64;
    for row in &exprs {
        for e in row {
            scale = scale.max(e.eval(&probe).abs());
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let gap = (exprs[i][j].eval(&probe) - exprs[j][i].eval(&probe)).abs();
            if gap > 1e-12 * scale.max(1.0) {
                return Err(CliError::Config(format!(
                    "metric table {} is not symmetric: components ({i},{j}) and ({j},{i}) \
                     differ by {gap:.3e} at the probe point",
                    path.display()
                )));
            }
        }
    }

    let name = table
        .name
        .unwrap_or_else(|| format!("custom:{}", path.display()));
    let eval = Arc::new(move |x: &[f64]| {
        DMatrix::from_fn(dim, dim, |i, j| exprs[i][j].eval(x))
    });
    Ok(MetricProvider::new(
        name,
        dim,
        eval,
        None,
        domain,
        table.constant,
    ))
}
