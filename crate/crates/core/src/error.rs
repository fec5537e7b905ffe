use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("coincident points: cannot compute angles between identical positions")]
    CoincidentPoints,

    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("number of phase levels must be at least 1")]
    ZeroLevels,

    #[error("phase index {index} at element {element} is out of range for {levels} levels")]
    PhaseIndexOutOfRange {
        element: usize,
        index: usize,
        levels: usize,
    },

    #[error("element index {index} is out of range for {len} elements")]
    ElementOutOfRange { index: usize, len: usize },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid optimizer setting: {0}")]
    InvalidOption(String),

    #[error("grouping {group_rows}x{group_cols} does not divide the {irs_rows}x{irs_cols} array")]
    NonDividingGrouping {
        group_rows: usize,
        group_cols: usize,
        irs_rows: usize,
        irs_cols: usize,
    },

    #[error("exhaustive search over L^N = {levels}^{elements} = {size} configurations exceeds the budget of {budget}")]
    BudgetExceeded {
        levels: usize,
        elements: usize,
        size: String,
        budget: u64,
    },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("channel file line {line}: {message}")]
    ChannelFormat { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
