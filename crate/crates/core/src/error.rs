use thiserror::Error;

/// Errors raised by synthesis, verification and simulation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },
    #[error("non-finite entry in {0}")]
    NonFiniteInput(&'static str),
    #[error("matrix is not Hurwitz (spectral abscissa {abscissa:.3e})")]
    NotHurwitz { abscissa: f64 },
    #[error("singular linear system in {0}")]
    SingularSolve(&'static str),
    #[error("matrix is not positive definite (pivot {pivot:.3e} at {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("rank deficient: numerical rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("pair (A, C) is not detectable: unobservable mode {re:.4}{im:+.4}i")]
    NotDetectable { re: f64, im: f64 },
    #[error("algebraic loop: feedthrough loop matrix is singular")]
    AlgebraicLoop,
    #[error("system is unstable (spectral abscissa {abscissa:.3e})")]
    Unstable { abscissa: f64 },
    #[error("impulse response did not decay within {horizon:.1} s")]
    NoDecay { horizon: f64 },
    #[error("realization is not minimal (controllable: {controllable}, observable: {observable})")]
    NotMinimal { controllable: bool, observable: bool },
    #[error("plant has a transmission zero at {re:.4}{im:+.4}i in the closed right half-plane")]
    NonMinimumPhase { re: f64, im: f64 },
    #[error("transmission zero candidates disagree between squaring-down draws")]
    RankAmbiguous,
    #[error("state became non-finite at t = {t:.6} s")]
    NonFiniteState { t: f64 },
    #[error("requested interactor pole {pole} is not strictly negative")]
    UnstablePoleRequested { pole: f64 },
    #[error("coupling system is singular: {0}")]
    SingularCoupling(String),
    #[error("interactor identities violated (residual {residual:.3e})")]
    InteractorMismatch { residual: f64 },
    #[error("degenerate interactor: T_z has no columns and D_z vanishes")]
    DegenerateInteractor,
    #[error("filter feasibility condition fails: {0}")]
    Infeasible(String),
    #[error("alpha too small: alpha_y = {alpha_y:.4e}, need alpha > {min_alpha:.4e}")]
    AlphaTooSmall { alpha_y: f64, min_alpha: f64 },
    #[error("adaptation gain {gamma:.4e} is below the admissible minimum {gamma_min:.4e}")]
    GammaTooSmall { gamma: f64, gamma_min: f64 },
    #[error("realization is not proper: {0}")]
    ImproperRealization(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dims(op: &'static str, detail: impl Into<String>) -> Error {
    Error::DimensionMismatch {
        op,
        detail: detail.into(),
    }
}
