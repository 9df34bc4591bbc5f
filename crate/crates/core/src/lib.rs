//! Tree augmentation with LP-relative approximation guarantees.

pub mod contraction;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod instance;
pub mod leafcover;
pub mod lpbound;
pub mod oracle;
pub mod ratio;
pub mod stress;

pub use error::{Error, Result};
pub use gen::{generate, GenSpec, TreeShape};
pub use instance::{parse_instance, Link, NodeId, RootedTree, TapInstance, TreeEdge};
pub use leafcover::{min_weight_exact_cover, ExactLeafCover, LeafWeightConfig};
pub use lpbound::{build_cut_model, build_pi_model, solve_lp, LpModel, LpSolution};
pub use oracle::{exact_leaf_cover_opt, exact_opt, shadow_minimal_twin_max, OracleResult};
pub use ratio::Rational;
pub use stress::{check_instance, run_stress, StressConfig, StressFailure, StressReport};
pub use contraction::{
    audit_ledger, solve, solve_with, AuditReport, ContractionKind, ContractionRecord, ContractionState, Solution,
    SolveOptions, SolveTrace,
};
