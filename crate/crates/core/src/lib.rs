//! Finite-sum quadratic objectives, permutation-based SGD runners,
//! adversarial lower-bound instances, exact iterate formulas and the
//! harness that turns convergence bounds into executable checks.

pub mod audit;
pub mod constructions;
pub mod error;
pub mod herding;
pub mod io;
pub mod linalg;
pub mod oracles;
pub mod quadratic;
pub mod rng;
pub mod schedule;
pub mod shuffle;
pub mod verify;

pub use audit::{
    audit_assumptions, audit_assumptions_with, AssumptionCheck, AuditOptions, AuditReport,
};
pub use constructions::{
    aggregate_dimensions, build, compute_u0_v0, ConstructionBundle, ConstructionSpec,
    RegimeInterval,
};
pub use error::{LabError, Result};
pub use herding::{herding_at_opt_strategy, herding_order, prefix_bound, HerdingOrder};
pub use linalg::Matrix;
pub use quadratic::{full_gradient, optimality_gap, FiniteSumProblem, QuadraticComponent};
pub use schedule::{recommended_step_size, StepParams, TheoremId};
pub use shuffle::{epoch_order, run, RunConfig, RunRecord, ShuffleStrategy};
