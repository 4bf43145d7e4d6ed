//! Iterated divided-sensitivity search for a critical perturbation.
//!
//! Starting from `delta = S / 2N`, the search repeatedly recomputes the
//! sensitivities of the perturbed weights against the fixed reference optimum
//! and adds `S / 2N` again. Each step keeps the perturbation allowable, moves
//! assigned deltas up and unassigned deltas down, and shrinks every finite
//! sensitivity by at least a factor `1 - 1/2N`, so the residual decays
//! geometrically toward zero.
//!
//! Infinite sensitivities belong to edges that are structurally pinned in or
//! out of every feasible matching. They receive the saturated delta once and
//! are left out of the residual, since no finite push can change them.

use crate::assignment::{Assignment, BipartiteInstance, Edge};
use crate::error::{Error, Result};
use crate::perturbation::{
    allowable_bound_with_cap, elementwise_sensitivities, elementwise_sensitivities_with,
    Perturbation, SensitivityMatrix, SensitivityOptions, DEFAULT_SATURATION_CAP,
};

pub const DEFAULT_MAX_ITERS: usize = 10_000;
/// Default stop tolerance relative to the largest initial finite sensitivity.
pub const DEFAULT_RELATIVE_STOP_TOL: f64 = 1e-6;
/// Absolute floor on the default stop tolerance.
pub const MIN_STOP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalOptions {
    /// Residual at which the search stops; `None` derives it from the initial
    /// sensitivities via [`default_stop_tol`].
    pub stop_tol: Option<f64>,
    /// Cap on the number of delta updates, the initial one included.
    pub max_iters: usize,
    pub saturation_cap: f64,
    /// Keep every iterate in the report.
    pub record_trace: bool,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self {
            stop_tol: None,
            max_iters: DEFAULT_MAX_ITERS,
            saturation_cap: DEFAULT_SATURATION_CAP,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalIterate {
    pub perturbation: Perturbation,
    /// Largest finite |s| on the weights perturbed by `perturbation`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSearchReport {
    pub perturbation: Perturbation,
    /// Number of delta updates applied, the initial `S / 2N` step included.
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub stop_tol: f64,
    /// Structurally pinned edges that got the saturation cap.
    pub saturated: Vec<Edge>,
    /// One entry per update when [`CriticalOptions::record_trace`] is set.
    pub trace: Vec<CriticalIterate>,
}

pub fn default_stop_tol(initial: &SensitivityMatrix) -> f64 {
    (DEFAULT_RELATIVE_STOP_TOL * initial.max_abs_finite()).max(MIN_STOP_TOL)
}

fn perturbed_sensitivities(
    instance: &BipartiteInstance,
    optimum: &Assignment,
    perturbation: &Perturbation,
) -> Result<SensitivityMatrix> {
    let shifted = perturbation.apply(instance)?;
    elementwise_sensitivities_with(&shifted, optimum, SensitivityOptions::degenerate_ok())
}

pub fn critical_search(
    instance: &BipartiteInstance,
    optimum: &Assignment,
    options: &CriticalOptions,
) -> Result<CriticalSearchReport> {
    if options.max_iters == 0 {
        return Err(Error::InvalidParameter(
            "max_iters must be at least 1".into(),
        ));
    }
    if let Some(tol) = options.stop_tol {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "stop tolerance must be positive, got {tol}"
            )));
        }
    }
    let initial = elementwise_sensitivities(instance, optimum)?;
    let stop_tol = options
        .stop_tol
        .unwrap_or_else(|| default_stop_tol(&initial));
    let divisor = 2.0 * instance.num_tasks().max(1) as f64;

    let start = allowable_bound_with_cap(&initial, instance.num_tasks(), options.saturation_cap);
    let mut delta = start.perturbation;
    let mut iterations = 1;
    let mut current = perturbed_sensitivities(instance, optimum, &delta)?;
    let mut residual = current.max_abs_finite();
    let mut trace = Vec::new();
    if options.record_trace {
        trace.push(CriticalIterate {
            perturbation: delta.clone(),
            residual,
        });
    }

    while residual > stop_tol && iterations < options.max_iters {
        for (edge, s) in current.iter() {
            if s.is_finite() {
                *delta.get_mut(edge).expect("same edge set") += s / divisor;
            }
        }
        iterations += 1;
        current = perturbed_sensitivities(instance, optimum, &delta)?;
        residual = current.max_abs_finite();
        if options.record_trace {
            trace.push(CriticalIterate {
                perturbation: delta.clone(),
                residual,
            });
        }
    }

    Ok(CriticalSearchReport {
        perturbation: delta,
        iterations,
        residual,
        converged: residual <= stop_tol,
        stop_tol,
        saturated: start.saturated,
        trace,
    })
}

/// Every finite sensitivity of the perturbed weights is within `tol` of
/// zero. Structurally pinned edges (infinite sensitivity) are ignored.
pub fn is_critical(
    instance: &BipartiteInstance,
    optimum: &Assignment,
    perturbation: &Perturbation,
    tol: f64,
) -> Result<bool> {
    optimum.validate_for(instance)?;
    let s = perturbed_sensitivities(instance, optimum, perturbation)?;
    Ok(s.max_abs_finite() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::solve_lap;
    use crate::perturbation::{allowable_bound, verify_allowable};

    fn solve(rows: &[[f64; 2]]) -> (BipartiteInstance, Assignment) {
        let inst = BipartiteInstance::from_dense(rows).unwrap();
        let opt = solve_lap(&inst).unwrap().assignment;
        (inst, opt)
    }

    #[test]
    fn two_by_two_reaches_exact_critical_point() {
        let (inst, opt) = solve(&[[0.0, 10.0], [10.0, 0.0]]);
        let r = critical_search(&inst, &opt, &CriticalOptions::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        assert_eq!(r.residual, 0.0);
        let d = |a, t| r.perturbation.get(Edge::new(a, t)).unwrap();
        assert_eq!([d(0, 0), d(0, 1), d(1, 0), d(1, 1)], [5.0, -5.0, -5.0, 5.0]);
        assert!(is_critical(&inst, &opt, &r.perturbation, r.stop_tol).unwrap());
    }

    #[test]
    fn loose_tolerance_stops_after_initial_step() {
        let inst = BipartiteInstance::from_dense(&[
            [91.0, 33.0, 15.0],
            [5.0, 86.0, 92.0],
            [85.0, 9.0, 42.0],
        ])
        .unwrap();
        let opt = solve_lap(&inst).unwrap().assignment;
        let opts = CriticalOptions {
            stop_tol: Some(1e6),
            ..CriticalOptions::default()
        };
        let r = critical_search(&inst, &opt, &opts).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        let s = elementwise_sensitivities(&inst, &opt).unwrap();
        assert_eq!(r.perturbation, allowable_bound(&s, 3).perturbation);
    }

    #[test]
    fn iteration_cap_is_reported_not_raised() {
        let inst = BipartiteInstance::from_dense(&[
            [91.0, 33.0, 15.0],
            [5.0, 86.0, 92.0],
            [85.0, 9.0, 42.0],
        ])
        .unwrap();
        let opt = solve_lap(&inst).unwrap().assignment;
        let opts = CriticalOptions {
            max_iters: 3,
            ..CriticalOptions::default()
        };
        let r = critical_search(&inst, &opt, &opts).unwrap();
        assert_eq!(r.iterations, 3);
        assert!(!r.converged);
        assert!(r.residual > r.stop_tol);
        assert!(verify_allowable(&inst, &opt, &r.perturbation).unwrap());
    }

    #[test]
    fn rejects_degenerate_start_and_bad_parameters() {
        let (inst, opt) = solve(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!(matches!(
            critical_search(&inst, &opt, &CriticalOptions::default()),
            Err(Error::DegenerateOptimum(_))
        ));
        let (inst, opt) = solve(&[[0.0, 10.0], [10.0, 0.0]]);
        let zero_iters = CriticalOptions {
            max_iters: 0,
            ..CriticalOptions::default()
        };
        assert!(critical_search(&inst, &opt, &zero_iters).is_err());
        let bad_tol = CriticalOptions {
            stop_tol: Some(0.0),
            ..CriticalOptions::default()
        };
        assert!(critical_search(&inst, &opt, &bad_tol).is_err());
    }

    #[test]
    fn zero_perturbation_is_not_critical() {
        let inst = BipartiteInstance::from_dense(&[
            [91.0, 33.0, 15.0],
            [5.0, 86.0, 92.0],
            [85.0, 9.0, 42.0],
        ])
        .unwrap();
        let opt = solve_lap(&inst).unwrap().assignment;
        assert!(!is_critical(&inst, &opt, &Perturbation::zero(&inst), 1e-6).unwrap());
        let s = elementwise_sensitivities(&inst, &opt).unwrap();
        let bound = allowable_bound(&s, 3).perturbation;
        assert!(!is_critical(&inst, &opt, &bound, 1e-6).unwrap());
    }

    #[test]
    fn pinned_edges_do_not_block_convergence() {
        // Only agent 3 can take task 2, pinning (3,2) in and (3,1) out.
        let inst = BipartiteInstance::from_sparse(vec![
            vec![Some(1.0), None],
            vec![Some(4.0), None],
            vec![Some(7.0), Some(2.0)],
        ])
        .unwrap();
        let opt = solve_lap(&inst).unwrap().assignment;
        let r = critical_search(&inst, &opt, &CriticalOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.saturated, vec![Edge::new(2, 0), Edge::new(2, 1)]);
        assert!(verify_allowable(&inst, &opt, &r.perturbation).unwrap());
    }
}
