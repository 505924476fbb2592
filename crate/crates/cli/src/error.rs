use thiserror::Error;

/// Failure classes, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, windows outside the data, unreadable spec or input path.
    #[error("config error: {0}")]
    Config(String),
    /// Input present but unusable: schema, values, numerics.
    #[error("data error: {0}")]
    Data(String),
    /// Nothing feasible to report.
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

/// Core errors raised while processing input data.
impl From<beveridge::Error> for CliError {
    fn from(e: beveridge::Error) -> Self {
        use beveridge::Error as E;
        match e {
            E::AllPairsInfeasible | E::InfeasibleFlowMatrix { .. } | E::UnemploymentOutOfRange { .. } => {
                CliError::Infeasible(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
