use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Error)]
pub enum GeomError {
    #[error("metric signature is not Lorentzian at {point:?} ({negatives} negative eigenvalue(s), expected 1)")]
    Signature { point: Vec<f64>, negatives: usize },

    #[error("degenerate metric at {point:?} (|det| = {det:.3e})")]
    DegenerateMetric { point: Vec<f64>, det: f64 },

    #[error("induced worldsheet metric degenerate or non-Lorentzian at {point:?}")]
    DegenerateWorldsheet { point: Vec<f64> },

    #[error("point {point:?} lies outside the {name} domain")]
    OutsideDomain { name: String, point: Vec<f64> },

    #[error("normal frame construction found {found} of {needed} normals at {point:?}")]
    Frame {
        point: Vec<f64>,
        found: usize,
        needed: usize,
    },

    #[error("edge conormal orientation undetermined at {point:?}; edge does not sit on the domain boundary")]
    Orientation { point: Vec<f64> },

    #[error("consistency check '{identity}' failed: residual {residual:.3e} exceeds {tolerance:.1e}")]
    Consistency {
        identity: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("difference quotients failed to converge (order estimate {order:.2} outside [{lo}, {hi}])")]
    NonConvergent { order: f64, lo: f64, hi: f64 },

    #[error("edge speed parameter u = {u:.4} at or beyond the near-null cutoff {cutoff}; refusing spectral work")]
    NearNullEdge { u: f64, cutoff: f64 },
}

pub type Result<T> = std::result::Result<T, GeomError>;

impl GeomError {
    /// True for conditions caused by the physical configuration rather than
    /// by malformed input (used by the CLI to pick exit codes).
    pub fn is_physics(&self) -> bool {
        !matches!(
            self,
            GeomError::MissingInput(_) | GeomError::InvalidInput(_)
        )
    }
}
