use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Cycles, malformed templates, or a realized subgraph that is not
    /// drawn from its dynamic stage's candidates.
    #[error("structural error: {0}")]
    Structural(String),
    #[error("training error: {0}")]
    Training(String),
    #[error("inconsistent evidence: {0}")]
    InconsistentEvidence(String),
    #[error("batch size {batch} outside calibrated range 1..={max}")]
    Range { batch: usize, max: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid distribution: {0}")]
    Distribution(String),
}
