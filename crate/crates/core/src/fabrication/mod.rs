//! Packings, cut orders, the cost model and arrangement generation.

mod arrange;
mod cost;
mod cuts;
mod packing;
mod plan;

pub use arrange::{
    arrangement_fingerprint, check_packable, enumerate_arrangements, generate_arrangements, ArrangementTerm,
};
pub use cost::{evaluate_costs, unstacked, Config, ObjectiveVector};
pub use cuts::{enumerate_cut_orders, required_cuts, Axis, Cut, CutGeometry, CutOrder};
pub use packing::{Offset, Packing, Placement};
pub use plan::{
    finalize_term, optimize_atomic, plan_term, term_bounds, AtomicPlans, CutPlan, CutPlanner, FabricationPlan,
    PlannedPiece, LOCAL_SEARCH_ITERATIONS,
};
