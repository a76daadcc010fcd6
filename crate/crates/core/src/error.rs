use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("region is unbounded")]
    UnboundedRegion,
    #[error("resolution m = {0} is invalid (must be >= 1)")]
    InvalidResolution(u32),
    #[error("step {n} is beyond the source sequence of length {len}")]
    StepOutOfRange { n: usize, len: usize },
    #[error("time s = {s} is outside [0, {horizon}]")]
    TimeOutOfRange { s: f64, horizon: f64 },
    #[error("source site ({x}, {y}) is not in the initial full set")]
    SourceOutsideInitialSet { x: i32, y: i32 },
    #[error("{got} boundary samples given, at least {need} required")]
    TooFewSamples { got: usize, need: usize },
    #[error("point is outside the open disk of radius {radius}")]
    OutsideDisk { radius: f64 },
    #[error("query points coincide (|p - q| = {distance:e})")]
    SingularQuery { distance: f64 },
    #[error("query point radius {radius} is outside the annulus 1 < r <= sqrt(2)")]
    OutsideAnnulus { radius: f64 },
    #[error("test function support is not contained in D_s; use the general form")]
    SupportNotContained,
    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureTolerance { estimate: f64, tolerance: f64 },
    #[error("{what} did not converge (residual {residual:e})")]
    NonConvergence { what: &'static str, residual: f64 },
    #[error("walk left the allocated lattice box")]
    Containment,
    #[error("sample is empty")]
    EmptySample,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("configuration field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
