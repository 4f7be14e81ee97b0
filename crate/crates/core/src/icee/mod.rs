//! Iterative contraction and expansion on the e-graph.

mod genome;
mod params;
mod search;

pub use genome::{root_nodes, term_of, DecodedTerm, Genome};
pub use params::{beta, derive_params, IceeParams};
pub use search::{
    largest_remainder, normalize, pareto_filter, run, Icee, IterationRecord, RunOptions, RunReport, INIT_SAMPLES,
    ORIENTATIONS,
};
