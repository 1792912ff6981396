//! Semidefinite solvers.

mod barrier;
pub mod coords;
pub mod domination;
pub mod feasibility;

pub use domination::{solve_domination, DominationProblem, SdpResult, SdpStatus};
pub use feasibility::{
    solve_joint_channel, solve_joint_channel_with, solve_povm_joint, solve_povm_joint_with,
    witness_channel, witness_effects, FeasibilityResult, FeasibilityStatus, OracleOptions,
    DEFAULT_ORACLE_BUDGET, FEASIBILITY_BAND,
};
