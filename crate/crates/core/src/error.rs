use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("variable names must be non-empty")]
    EmptyName,
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("variable `{variable}` has {found} entries, expected {expected}")]
    LengthMismatch {
        variable: String,
        expected: usize,
        found: usize,
    },
    #[error("qualitative variable `{variable}` has {observed} observed level(s), at least 2 are required")]
    TooFewLevels { variable: String, observed: usize },
    #[error("quantitative variable `{0}` is constant over its observed entries")]
    ZeroVariance(String),
    #[error("variable `{0}` has no observed entries")]
    AllMissing(String),
    /// A level vanished or a column became constant, typically on a bootstrap resample.
    #[error("variable `{variable}` cannot be standardized: {}", rare_detail(.level))]
    RareCategory {
        variable: String,
        level: Option<String>,
    },
    #[error("vector is constant, the correlation ratio is undefined")]
    ConstantVector,
    #[error("block has no nonzero entries")]
    ZeroBlock,
    #[error("expected a {expected} variable, `{variable}` is not")]
    WrongKind {
        variable: String,
        expected: &'static str,
    },
    #[error("at least {required} variables are required, got {found}")]
    TooFewVariables { required: usize, found: usize },
    #[error("variable index {index} out of range for {p} variables")]
    VariableIndex { index: usize, p: usize },
    #[error("number of clusters {k} must lie in 1..={p}")]
    InvalidK { k: usize, p: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("gain in cohesion is undefined: the one-cluster homogeneity equals p")]
    DegenerateGain,
    #[error("merge step {step}: {source}")]
    MergeStep { step: usize, source: Box<Error> },
    #[error("all {replicates} bootstrap replicates failed; last failure: {last}. Rare categories of qualitative variables can vanish from a resample, leaving a constant indicator column")]
    AllReplicatesFailed { replicates: usize, last: Box<Error> },
}

impl Error {
    /// True when the root cause is a vanished level or a constant column.
    pub fn is_rare_category(&self) -> bool {
        match self {
            Error::RareCategory { .. } => true,
            Error::MergeStep { source, .. } => source.is_rare_category(),
            _ => false,
        }
    }
}

fn rare_detail(level: &Option<String>) -> String {
    match level {
        Some(level) => alloc::format!("level `{level}` has no observations"),
        None => String::from("column is constant"),
    }
}
