use rayon::prelude::*;

use crate::assignment::{
    assignment_cost, tie_tolerance, Assignment, BipartiteInstance, Edge, EdgeConstraint, EdgeMap,
    WarmStart,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityOptions {
    /// Return raw values, zeros included, instead of rejecting a
    /// non-unique reference optimum.
    pub allow_degenerate: bool,
    /// Edge count at which the per-edge solves are spread over the rayon
    /// pool. Output does not depend on this.
    pub parallel_threshold: usize,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        Self {
            allow_degenerate: false,
            parallel_threshold: 256,
        }
    }
}

impl SensitivityOptions {
    pub fn degenerate_ok() -> Self {
        Self {
            allow_degenerate: true,
            ..Self::default()
        }
    }
}

/// Signed single-edge budgets relative to a reference optimum: non-negative
/// on assigned edges, non-positive elsewhere. `+inf` marks an assigned edge
/// no feasible matching can avoid, `-inf` an unassigned edge no feasible
/// matching can use.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityMatrix {
    values: EdgeMap<f64>,
}

impl SensitivityMatrix {
    pub fn from_map(values: EdgeMap<f64>) -> Self {
        Self { values }
    }

    pub fn get(&self, edge: Edge) -> Option<f64> {
        self.values.get(edge).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.values.iter().map(|(e, v)| (e, *v))
    }

    pub fn as_map(&self) -> &EdgeMap<f64> {
        &self.values
    }

    /// Largest finite magnitude, 0 if there is none.
    pub fn max_abs_finite(&self) -> f64 {
        self.iter()
            .map(|(_, s)| s)
            .filter(|s| s.is_finite())
            .fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Checks the orientation invariant against `optimum`.
    pub fn sign_pattern_holds(&self, optimum: &Assignment) -> bool {
        self.iter().all(|(e, s)| {
            if optimum.contains(e) {
                s >= 0.0 && s != f64::NEG_INFINITY
            } else {
                s <= 0.0 && s != f64::INFINITY
            }
        })
    }
}

fn edge_sensitivity(
    warm: &WarmStart,
    optimum: &Assignment,
    optimum_cost: f64,
    edge: Edge,
) -> Result<f64> {
    let tol = tie_tolerance(optimum_cost);
    if optimum.contains(edge) {
        let Some(alt) = warm.constrained_cost(edge, EdgeConstraint::Block) else {
            return Ok(f64::INFINITY);
        };
        let s = alt - optimum_cost;
        if s < -tol {
            return Err(Error::NotOptimal { edge, gap: -s });
        }
        Ok(s.max(0.0))
    } else {
        let Some(alt) = warm.constrained_cost(edge, EdgeConstraint::Force) else {
            return Ok(f64::NEG_INFINITY);
        };
        let s = optimum_cost - alt;
        if s > tol {
            return Err(Error::NotOptimal { edge, gap: s });
        }
        Ok(s.min(0.0))
    }
}

pub fn elementwise_sensitivities(
    instance: &BipartiteInstance,
    optimum: &Assignment,
) -> Result<SensitivityMatrix> {
    elementwise_sensitivities_with(instance, optimum, SensitivityOptions::default())
}

/// Per-edge gap between `optimum` and the best assignment that flips the
/// edge's membership (block if assigned, force if not).
///
/// Semantically optimal references with floating-point wobble get their
/// wrong-signed near-zero values clamped to 0; a flip that beats the
/// reference by more than the tie tolerance is [`Error::NotOptimal`].
pub fn elementwise_sensitivities_with(
    instance: &BipartiteInstance,
    optimum: &Assignment,
    options: SensitivityOptions,
) -> Result<SensitivityMatrix> {
    optimum.validate_for(instance)?;
    let optimum_cost = assignment_cost(instance, optimum)?;
    let edges: Vec<Edge> = instance.edges().collect();
    let warm = WarmStart::new(instance).ok_or(Error::Infeasible)?;

    let values: Vec<f64> = if edges.len() >= options.parallel_threshold {
        edges
            .par_iter()
            .map(|&e| edge_sensitivity(&warm, optimum, optimum_cost, e))
            .collect::<Result<_>>()?
    } else {
        edges
            .iter()
            .map(|&e| edge_sensitivity(&warm, optimum, optimum_cost, e))
            .collect::<Result<_>>()?
    };

    if !options.allow_degenerate {
        let tol = tie_tolerance(optimum_cost);
        if let Some((e, _)) = edges.iter().zip(&values).find(|(_, s)| s.abs() <= tol) {
            return Err(Error::DegenerateOptimum(*e));
        }
    }

    let mut map = instance.weights().map(|_, _| 0.0);
    for (e, s) in edges.into_iter().zip(values) {
        *map.get_mut(e).expect("edge from instance") = s;
    }
    Ok(SensitivityMatrix { values: map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::solve_lap;

    fn matrix(inst: &BipartiteInstance) -> Vec<Vec<f64>> {
        let opt = solve_lap(inst).unwrap().assignment;
        let s = elementwise_sensitivities(inst, &opt).unwrap();
        (0..inst.num_agents())
            .map(|a| {
                (0..inst.num_tasks())
                    .map(|t| s.get(Edge::new(a, t)).unwrap())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn three_by_three_matrix() {
        let inst = BipartiteInstance::from_dense(&[
            [91.0, 33.0, 15.0],
            [5.0, 86.0, 92.0],
            [85.0, 9.0, 42.0],
        ])
        .unwrap();
        assert_eq!(
            matrix(&inst),
            vec![
                vec![-163.0, -51.0, 51.0],
                vec![157.0, -157.0, -163.0],
                vec![-157.0, 51.0, -51.0],
            ]
        );
    }

    #[test]
    fn single_edge_is_unblockable() {
        let inst = BipartiteInstance::from_dense(&[[5.0]]).unwrap();
        assert_eq!(matrix(&inst), vec![vec![f64::INFINITY]]);
    }

    #[test]
    fn two_by_two_gap() {
        let inst = BipartiteInstance::from_dense(&[[0.0, 10.0], [10.0, 0.0]]).unwrap();
        assert_eq!(matrix(&inst), vec![vec![20.0, -20.0], vec![-20.0, 20.0]]);
    }

    #[test]
    fn unusable_edge_is_negative_infinity() {
        // Only agent 1 can cover task 1, so forcing (1,2) leaves it uncovered.
        let inst =
            BipartiteInstance::from_sparse(vec![vec![Some(1.0), Some(4.0)], vec![None, Some(2.0)]])
                .unwrap();
        let opt = solve_lap(&inst).unwrap().assignment;
        let s = elementwise_sensitivities(&inst, &opt).unwrap();
        assert_eq!(s.get(Edge::new(0, 1)), Some(f64::NEG_INFINITY));
        assert_eq!(s.get(Edge::new(0, 0)), Some(f64::INFINITY));
        assert_eq!(s.get(Edge::new(1, 1)), Some(f64::INFINITY));
        assert_eq!(s.get(Edge::new(1, 0)), None);
        assert!(s.sign_pattern_holds(&opt));
    }

    #[test]
    fn degenerate_optimum_is_rejected_unless_opted_in() {
        let inst = BipartiteInstance::from_dense(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let opt = solve_lap(&inst).unwrap().assignment;
        assert!(matches!(
            elementwise_sensitivities(&inst, &opt),
            Err(Error::DegenerateOptimum(_))
        ));
        let raw = elementwise_sensitivities_with(&inst, &opt, SensitivityOptions::degenerate_ok())
            .unwrap();
        assert!(raw.iter().all(|(_, s)| s == 0.0));
    }

    #[test]
    fn suboptimal_reference_is_reported() {
        let inst = BipartiteInstance::from_dense(&[[0.0, 10.0], [10.0, 0.0]]).unwrap();
        let anti = Assignment::from_task_agents(vec![1, 0]).unwrap();
        assert!(matches!(
            elementwise_sensitivities(&inst, &anti),
            Err(Error::NotOptimal { .. })
        ));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|i| (0..7).map(|j| ((i * 31 + j * 17) % 23) as f64).collect())
            .collect();
        let inst = BipartiteInstance::from_dense(&rows).unwrap();
        let opt = solve_lap(&inst).unwrap().assignment;
        let seq = SensitivityOptions {
            allow_degenerate: true,
            parallel_threshold: usize::MAX,
        };
        let par = SensitivityOptions {
            allow_degenerate: true,
            parallel_threshold: 0,
        };
        assert_eq!(
            elementwise_sensitivities_with(&inst, &opt, seq).unwrap(),
            elementwise_sensitivities_with(&inst, &opt, par).unwrap()
        );
    }
}
