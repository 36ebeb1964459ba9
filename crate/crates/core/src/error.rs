use thiserror::Error;

/// Errors raised by the boundary calculus, the geodesic solvers and the
/// circumcenter machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid boundary sample: {0}")]
    InvalidSample(String),
    #[error("invalid sampled metric: {0}")]
    InvalidMetric(String),
    #[error("cross-ratio needs four distinct indices, got ({0}, {1}, {2}, {3})")]
    InvalidQuadruple(usize, usize, usize, usize),
    #[error("index {index} out of range for a sample of size {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("metrics are defined on different boundary samples")]
    SampleMismatch,
    #[error("metrics are not Moebius equivalent (defect {defect:.3e} > tolerance {tol:.3e})")]
    NotMoebiusEquivalent { defect: f64, tol: f64 },
    #[error("sample of size {0} is too small")]
    InsufficientSample(usize),
    #[error("no point at distance one from index {index} (row max {row_max})")]
    NotAntipodalAtPoint { index: usize, row_max: f64 },
    #[error("Gromov product of an ideal point with itself is infinite")]
    InfiniteGromovProduct,
    #[error("point ({0}, {1}) is not inside the unit disk")]
    OutsideDisk(f64, f64),
    #[error("geodesic integration failed: {0}")]
    IntegrationFailure(String),
    #[error("boundary value problem did not converge: {0}")]
    BvpFailure(String),
    #[error("limit did not converge before the truncation radius: {0}")]
    LimitNotConverged(String),
    #[error("curvature bound violated: max curvature {max_curvature} > {bound}")]
    CurvatureBound { max_curvature: f64, bound: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("optimizer hit the iteration cap ({iterations}) with objective {value}")]
    MaxIterations { iterations: usize, value: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerical solvers, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegrationFailure(_)
                | Error::BvpFailure(_)
                | Error::LimitNotConverged(_)
                | Error::MaxIterations { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
