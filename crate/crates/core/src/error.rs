use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid transport spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate auxiliary shape: normalization integral is zero")]
    DegenerateShape,

    #[error("{what} violated: residual {residual:e} exceeds {tolerance:e}")]
    InternalConsistency {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("grid resolution too coarse: {0}")]
    Resolution(String),

    #[error("wave function leaks through the grid edge (edge/peak amplitude {ratio:e}); enlarge the grid")]
    BoundaryLeak { ratio: f64 },

    #[error("at epsilon = {epsilon}: {source}")]
    AtEpsilon {
        epsilon: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("protocol file: {0}")]
    ProtocolFile(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Non-fatal diagnostics attached to results; also emitted through `log`.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Fixed-step integration with a coarse phase increment per step.
    Resolution { radians_per_step: f64 },
    /// Quadrature did not settle to the requested relative change.
    Accuracy { relative_change: f64, nodes: usize },
    /// Optimizer minimum sits on the bracket edge.
    Boundary { epsilon: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Resolution { radians_per_step } => write!(
                f,
                "integration step advances {radians_per_step:.3} rad per step (> 0.1); increase n_steps"
            ),
            Warning::Accuracy {
                relative_change,
                nodes,
            } => write!(
                f,
                "quadrature not converged: relative change {relative_change:e} with {nodes} nodes"
            ),
            Warning::Boundary { epsilon } => write!(
                f,
                "minimum at bracket edge epsilon = {epsilon}; consider widening the bracket"
            ),
        }
    }
}

pub(crate) fn emit(warning: Warning) -> Warning {
    log::warn!("{warning}");
    warning
}
