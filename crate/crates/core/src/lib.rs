//! Zero-error in-network function computation: encoder synthesis on directed
//! trees, rate-region bounds for DAGs, and interactive protocols for
//! sum-threshold and sum-interval functions on undirected graphs.
//!
//! Everything here works at "desk scale": alphabets, graphs and blocks small
//! enough that feasibility claims can be certified by exact enumeration. Bit
//! counts are exact ceilings of logarithms of integer alphabet sizes, Kraft
//! sums and probabilities are exact rationals, and only reported rates are
//! doubles (compared with a 1e-9 tolerance).

pub mod codebook;
pub mod dag;
pub mod error;
pub mod graph_agg;
pub mod interactive;
pub mod json;
pub mod model;
pub mod partition;
pub mod simplex;
pub mod transcript;
pub mod tree_code;
pub mod tree_protocol;
pub mod util;

pub use error::{Error, Result};
pub use model::{
    Alphabet, Block, Caps, Cut, ExactRate, FunctionTable, GraphKind, JointDistribution,
    NetworkGraph, NodeId, Rate, RateVector,
};
pub use transcript::{Message, ProtocolTranscript};

/// Tolerance for comparisons of real-valued rates and entropies.
pub const RATE_TOLERANCE: f64 = 1e-9;
