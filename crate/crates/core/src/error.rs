use thiserror::Error;

/// Errors raised by the optics engine.
///
/// Validation variants describe bad inputs; the remaining ones are
/// failures of a computation on otherwise valid inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("crystal definition parse failure: {0}")]
    Parse(String),
    #[error("missing field: {0}")]
    MissingField(&'static str),
    #[error("invalid crystal definition: {0}")]
    InvalidCrystal(String),
    #[error("unknown formula family `{0}`")]
    UnknownFormula(String),
    #[error("wavelength {lambda_nm} nm outside transparency [{min_nm}, {max_nm}] nm")]
    OutsideTransparency { lambda_nm: f64, min_nm: f64, max_nm: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate direction: |n_fast - n_slow| = {splitting:e} (optic axis)")]
    DegenerateDirection { splitting: f64 },
    #[error("total internal reflection at incidence {incidence_deg:.4} deg")]
    TotalInternalReflection { incidence_deg: f64 },
    #[error("no phase matching: {0}")]
    NoPhaseMatching(String),
    #[error("cones do not intersect (minimum separation {min_separation_deg:.6} deg)")]
    NoIntersection { min_separation_deg: f64 },
    #[error("missing d-matrix for {0}")]
    MissingTensor(&'static str),
    #[error("projection pole")]
    ProjectionPole,
}

impl Error {
    /// True for errors caused by invalid input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::MissingField(_)
                | Error::InvalidCrystal(_)
                | Error::UnknownFormula(_)
                | Error::OutsideTransparency { .. }
                | Error::InvalidInput(_)
                | Error::MissingTensor(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
