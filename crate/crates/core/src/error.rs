use thiserror::Error;

use crate::series::MonthDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("extrapolation refused: {x0} outside [{min}, {max}]")]
    ExtrapolationRefused { x0: f64, min: f64, max: f64 },

    #[error("degenerate splice ratio at {0}")]
    DegenerateSpliceRatio(MonthDate),

    #[error("empty population month {0}")]
    EmptyPopulationMonth(MonthDate),

    #[error("missing value for {series} at {month}")]
    MissingValue { series: &'static str, month: MonthDate },

    #[error("division by zero unemployment at {0}")]
    ZeroUnemployment(MonthDate),

    #[error("undefined intensity at {0}: ue is zero")]
    UndefinedIntensity(MonthDate),

    #[error("infeasible flow matrix at {month}: {detail}")]
    InfeasibleFlowMatrix { month: MonthDate, detail: String },

    #[error("raking did not converge at {month} after {iterations} iterations (worst residual {residual:e})")]
    RakingNotConverged { month: MonthDate, iterations: usize, residual: f64 },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("too few observations: need at least {needed}, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("nonpositive input to {what} at {month}")]
    NonPositive { what: &'static str, month: MonthDate },

    #[error("log of zero non-searcher pool at {0}")]
    ZeroNonSearcherPool(MonthDate),

    #[error("panel is missing derived aggregates; run derive_aggregates first")]
    AggregatesMissing,

    #[error("reference month {0} has no value")]
    ReferenceMonthMissing(MonthDate),

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("all matched pairs infeasible")]
    AllPairsInfeasible,

    #[error("unemployment left (0,1) at {month}: {value}")]
    UnemploymentOutOfRange { month: MonthDate, value: f64 },

    #[error("csv: {0}")]
    Csv(String),

    #[error("missing column(s): {0}")]
    MissingColumns(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
