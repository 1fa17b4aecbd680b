use crate::model::NodeId;

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("node cap exceeded: {n} nodes, cap {cap} (cut enumeration is 2^(n-1))")]
    NodeCapExceeded { n: usize, cap: usize },
    #[error("enumeration cap exceeded: {tuples} tuples, cap {cap}")]
    EnumerationCapExceeded { tuples: u128, cap: u64 },
    #[error("scheme cap exceeded: {count} candidate trees, cap {cap}")]
    TreeCapExceeded { count: u128, cap: u64 },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("distribution must be strictly positive, but a zero-probability tuple exists; \
             coupled encoders for degenerate supports are not synthesized")]
    ZeroProbability,
    #[error("function does not depend on x1 + x2 only")]
    NotSumDependent,
    #[error("interval hypothesis violated: b = {b} exceeds half of the total capacity {capacity}")]
    IntervalHypothesis { b: u32, capacity: u32 },
    #[error("threshold {theta} out of range 0..={max}")]
    ThresholdOutOfRange { theta: u32, max: u32 },
    #[error("operation requires a {expected} graph, got {got}")]
    WrongGraphKind { expected: &'static str, got: &'static str },
    #[error("unsupported aggregation function: {0}")]
    UnsupportedAggregation(String),
    #[error("rate vector is missing edge ({0}, {1})")]
    MissingRate(NodeId, NodeId),
    #[error("block shape mismatch: {0}")]
    BlockMismatch(String),
    #[error("linear program infeasible: {0}")]
    Infeasible(String),
    #[error("linear program unbounded")]
    Unbounded,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
