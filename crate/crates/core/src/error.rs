use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {index} = {value} lies outside ({lower}, {upper}) or within the boundary guard")]
    OutOfDomain {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model `{0}` carries no analytic metric rule")]
    NoAnalyticRule(String),
    #[error("model `{0}` carries no density family")]
    NoDensityFamily(String),
    #[error("quadrature did not converge: relative change {change:e} at order {order}")]
    QuadratureNotConverged { order: usize, change: f64 },
    #[error("metric determinant {0:e} is not positive")]
    NonPositiveDeterminant(f64),
    #[error("metric is singular at the requested point")]
    SingularMetric,
    #[error("reparametrization Jacobian is not invertible (det = {0:e})")]
    NonInvertibleJacobian(f64),
    #[error("observed value has zero evidence under the prior")]
    ZeroEvidence,
    #[error("moment target {target} is outside the attainable range ({min}, {max})")]
    InfeasibleMoment { target: f64, min: f64, max: f64 },
    #[error("could not bracket beta within [{lower}, {upper}]")]
    BetaNotBracketed { lower: f64, upper: f64 },
    #[error("root finder exceeded {0} iterations")]
    MaxIterations(usize),
    #[error("invalid grid prior: {0}")]
    InvalidGrid(String),
    #[error("integrator step size underflow at tau = {tau}")]
    StepUnderflow { tau: f64 },
    #[error("shooting diverged after {iterations} iterations, best residual {best_residual:e}")]
    ShootingDiverged {
        iterations: usize,
        best_residual: f64,
    },
    #[error("path covers [{start}, {end}] but [{from}, {to}] was requested")]
    PathTooShort {
        start: f64,
        end: f64,
        from: f64,
        to: f64,
    },
    #[error("non-finite volume integrand at alpha = {0}")]
    NonFiniteIntegrand(f64),
    #[error("tail window holds {got} samples, need at least {need}")]
    WindowTooSmall { got: usize, need: usize },
    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),
    #[error("parameter `{name}` = {value} violates {bound}")]
    ParamOutOfRange {
        name: String,
        value: f64,
        bound: String,
    },
    #[error("scenario parse error at line {line}: {message}")]
    ScenarioParse { line: usize, message: String },
    #[error("invalid scenario: {}", .0.join("; "))]
    ScenarioInvalid(Vec<String>),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Tags the error with the pipeline stage that produced it.
    pub fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn param(name: &str, value: f64, bound: impl Into<String>) -> Self {
        Error::ParamOutOfRange {
            name: name.to_string(),
            value,
            bound: bound.into(),
        }
    }
}
