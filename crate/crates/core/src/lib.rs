//! Linear assignment with allowable weight-perturbation analysis.
//!
//! Given a weighted bipartite graph of agents and tasks, this crate finds the
//! minimum-cost assignment and then characterizes how far every edge weight
//! may move, simultaneously and independently, before that assignment stops
//! being optimal. The [`sim`] module uses those bounds to lock assignments in
//! a noisy multi-vehicle pursuit and suppress reassignment churn.

pub mod assignment;
pub mod error;
pub mod io;
pub mod perturbation;
pub mod sim;

pub use assignment::{
    assignment_cost, brute_force_solve, constrained_solve, solve_lap, uniqueness_check, Assignment,
    BipartiteInstance, Edge, EdgeConstraint, EdgeMap, SolveReport, TOL_EQ,
};
pub use error::{Error, Result};
pub use perturbation::{
    allowable_bound, certify_optimal, critical_search, elementwise_sensitivities,
    halfspace_intervals, is_critical, verify_allowable, AllowableBound, CriticalOptions,
    CriticalSearchReport, ErrorBounds, Interval, IntervalTable, Perturbation, SensitivityMatrix,
    SensitivityOptions,
};
