use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] l1ofc::Error),
    #[error("design is infeasible: {0}")]
    DesignInfeasible(String),
    #[error("state diverged at t = {t:.4} s (norm {norm:.3e})")]
    Divergence { t: f64, norm: f64 },
    #[error("state became non-finite at t = {t:.6} s")]
    NonFiniteState { t: f64 },
    #[error("pendulum mass matrix is singular (det {det:.3e})")]
    MassMatrixSingular { det: f64 },
    #[error("baseline run without delay is already unstable")]
    UnstableBaseline,
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code: 1 infeasible, 2 divergence, 3 configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::DesignInfeasible(_) | Self::Core(l1ofc::Error::Infeasible(_)) => 1,
            Self::Core(l1ofc::Error::AlphaTooSmall { .. }) | Self::Core(l1ofc::Error::GammaTooSmall { .. }) => 1,
            Self::Divergence { .. }
            | Self::NonFiniteState { .. }
            | Self::Core(l1ofc::Error::NonFiniteState { .. })
            | Self::MassMatrixSingular { .. }
            | Self::UnstableBaseline => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn config(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}
