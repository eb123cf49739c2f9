use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("angle out of domain: {0}")]
    AngleDomain(String),

    #[error("degenerate triangle (|signed area| = {area:e}, perimeter = {perimeter:e})")]
    DegenerateTriangle { area: f64, perimeter: f64 },

    #[error("point not in the upper half plane (im = {im})")]
    HalfPlaneDomain { im: f64 },

    #[error("cotangent identity violated: residual {residual:e} exceeds tolerance {tol:e} at {a:?}")]
    IdentityViolation { a: [f64; 3], residual: f64, tol: f64 },

    #[error("subdivision depth {levels} exceeds the cap of {max}")]
    DepthExceeded { levels: usize, max: usize },

    #[error("non-positive centroid coefficient A = {value} at shape {a:?}; the Gaussian integral diverges")]
    NonPositiveA { a: [f64; 3], value: f64 },

    #[error("action family `{family}` is not finite on triangle {triangle} (shape {a:?})")]
    InadmissibleTriangle { family: String, triangle: usize, a: [f64; 3] },

    #[error("interior block is not positive definite (smallest eigenvalue estimate {min_eig:e}, norm {norm:e}){}",
        level.map(|l| format!(" while eliminating level {l}")).unwrap_or_default())]
    SingularInterior { min_eig: f64, norm: f64, level: Option<usize> },

    #[error("expression parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    ///
    /// 2 usage, 3 domain (degenerate or inadmissible input), 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::InvalidArgument(_) => 2,
            Error::AngleDomain(_)
            | Error::DegenerateTriangle { .. }
            | Error::HalfPlaneDomain { .. }
            | Error::DepthExceeded { .. }
            | Error::NonPositiveA { .. }
            | Error::InadmissibleTriangle { .. } => 3,
            Error::IdentityViolation { .. } | Error::SingularInterior { .. } => 4,
        }
    }
}
