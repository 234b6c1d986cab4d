use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a>0 required for K=2 (got a={0})")]
    NonPositiveA(f64),
    #[error("non-finite sample {value} at r={r}, z={z}")]
    NonFiniteSample { r: f64, z: f64, value: f64 },
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("field is not azimuthal: rho/zeta energy fraction {fraction:.3e} exceeds {tol:.1e}")]
    NotAzimuthal { fraction: f64, tol: f64 },
    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    CgNotConverged { iterations: usize, residual: f64 },
    #[error("fiber map changes sign {changes} times on the sampled range; F4 (monotone f/|u|) is violated")]
    FiberSignPattern { changes: usize },
    #[error("iterate collapsed to zero (norm {0:.3e}); check F3 or the initialization")]
    Collapse(f64),
    #[error("point coincides with the north pole Q=(0,0,0,1)")]
    NorthPole,
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("assumption {assumption} not satisfied: {detail}")]
    Assumption { assumption: &'static str, detail: String },
    #[error("no path endpoint with negative energy within the radius budget: {0}")]
    NoNegativeEndpoint(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("malformed field dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveA(a))
    }
}
