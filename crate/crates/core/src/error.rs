use thiserror::Error;

/// Errors surfaced by the construction, hull and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("operator violates d = 2m / rank hypothesis: {0}")]
    OperatorHypothesis(String),

    #[error("first symbol matrix does not annihilate the state; rotate first (residual {0:.3e})")]
    RotateFirst(f64),

    #[error("cone appears trivial: no direction accepted after {0} trials")]
    TrivialCone(usize),

    #[error("coercivity violated along direction (no sign change up to |t| = {0:.3e})")]
    CoercivityViolated(f64),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("xi not in interior along sampled directions")]
    NotInterior,

    #[error("hull cloud grew past {cap} points (reached {size}); use a larger dedup_eps")]
    CloudTooLarge { cap: usize, size: usize },

    #[error("value mismatch at patch boundary: pattern exterior + shift is {gap:.3e} away from the ambient value")]
    PatchMismatch { gap: f64 },

    #[error("xi outside computed hull")]
    OutsideHull,

    #[error("hull is not star shaped about xi0 ({failures} failing segments)")]
    NotStarShaped { failures: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Variant name, for messages and manifests.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dimension(_) => "Dimension",
            Self::Input(_) => "Input",
            Self::OperatorHypothesis(_) => "OperatorHypothesis",
            Self::RotateFirst(_) => "RotateFirst",
            Self::TrivialCone(_) => "TrivialCone",
            Self::CoercivityViolated(_) => "CoercivityViolated",
            Self::Precondition(_) => "Precondition",
            Self::NotInterior => "NotInterior",
            Self::CloudTooLarge { .. } => "CloudTooLarge",
            Self::PatchMismatch { .. } => "PatchMismatch",
            Self::OutsideHull => "OutsideHull",
            Self::NotStarShaped { .. } => "NotStarShaped",
            Self::Json(_) => "Json",
            Self::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
