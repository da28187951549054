use thiserror::Error;

/// Errors surfaced by mesh construction, assembly and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("point ({0}, {1}) is outside the mesh domain")]
    OutsideDomain(f64, f64),

    #[error("non-elliptic elasticity tensor on triangle {0}")]
    NonElliptic(usize),

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("optimizer did not converge within {iterations} iterations (primal {primal:e}, dual {dual:e})")]
    NonConverged {
        iterations: usize,
        primal: f64,
        dual: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tags an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
