use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Solver(#[from] far3_core::Error),
    #[error("ICP did not converge within {iterations} outer iterations (last delta {last_delta:e})")]
    IcpNotConverged { iterations: usize, last_delta: f64 },
    #[error("degenerate correspondences: {0}")]
    DegenerateCorrespondences(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for bad input, 1 for anything that failed while solving.
    pub fn exit_code(&self) -> i32 {
        use far3_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Io { .. } | CliError::Input(_) => 2,
            CliError::Solver(
                E::EmptySet
                | E::LengthMismatch { .. }
                | E::WeightCount { .. }
                | E::NonPositiveWeight { .. }
                | E::NonFinitePoint { .. }
                | E::TooFewPoints { .. }
                | E::InvalidConfig(_),
            ) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
