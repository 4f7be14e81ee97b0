//! Co-optimization of discrete design variants and fabrication plans with a
//! Bag-of-Parts e-graph.

pub mod baseline;
pub mod egraph;
pub mod error;
pub mod export;
pub mod fabrication;
mod fingerprint;
pub mod icee;
pub mod model;
pub mod moo;

pub use egraph::{BopEGraph, Cascade, EClassId, EGraphStats, ENodeId};
pub use error::{Error, Result};
pub use fabrication::{ArrangementTerm, CutOrder, CutPlan, FabricationPlan, ObjectiveVector, Packing};
pub use fingerprint::Fingerprint;
pub use model::{parse_model, BagOfParts, BopKey, DesignSpaceModel, DesignVector};
