use thiserror::Error;

/// Errors shared by every stage of the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular fit (condition estimate {cond:.3e})")]
    SingularFit { cond: f64 },
    #[error("degenerate parametrization: speed {speed:.3e} at segment {segment}, lambda {lambda}")]
    DegenerateParametrization { segment: usize, lambda: f64, speed: f64 },
    #[error("no admissible gains{}", at_speed(.speed))]
    NoAdmissibleGains { speed: Option<f64> },
    #[error("simulation diverged at step {step}")]
    Divergence { step: usize },
    #[error("internal numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

fn at_speed(speed: &Option<f64>) -> String {
    speed.map(|v| format!(" at V = {v} m/s")).unwrap_or_default()
}
