//! Weighted bipartite instances, assignments, and the LAP solvers.

mod brute;
mod instance;
mod solver;

pub use brute::{
    brute_force_solve, brute_force_solve_capped, for_each_matching, BruteForceOptimum,
    DEFAULT_BRUTE_FORCE_CAP,
};
pub use instance::{Assignment, BipartiteInstance, Edge, EdgeMap};
pub use solver::{
    assignment_cost, constrained_solve, solve_lap, tie_tolerance, uniqueness_check, EdgeConstraint,
    SolveReport, TOL_EQ,
};
pub(crate) use solver::{optimal_cost, WarmStart};
