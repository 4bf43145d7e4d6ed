use std::fmt;

use crate::assignment::{
    assignment_cost, optimal_cost, tie_tolerance, Assignment, BipartiteInstance, Edge, EdgeMap,
};
use crate::error::{Error, Result};
use crate::perturbation::SensitivityMatrix;

/// Finite stand-in for an infinite sensitivity when forming a bound.
pub const DEFAULT_SATURATION_CAP: f64 = 1e9;

/// Additive per-edge weight deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    deltas: EdgeMap<f64>,
}

impl Perturbation {
    pub fn new(deltas: EdgeMap<f64>) -> Result<Self> {
        if let Some((e, v)) = deltas.iter().find(|(_, d)| !d.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "perturbation on edge {e} is not finite ({v})"
            )));
        }
        Ok(Self { deltas })
    }

    pub fn zero(instance: &BipartiteInstance) -> Self {
        Self {
            deltas: instance.weights().map(|_, _| 0.0),
        }
    }

    pub fn get(&self, edge: Edge) -> Option<f64> {
        self.deltas.get(edge).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.deltas.iter().map(|(e, v)| (e, *v))
    }

    pub fn as_map(&self) -> &EdgeMap<f64> {
        &self.deltas
    }

    pub(crate) fn get_mut(&mut self, edge: Edge) -> Option<&mut f64> {
        self.deltas.get_mut(edge)
    }

    /// Weights of `instance` shifted by this perturbation.
    pub fn apply(&self, instance: &BipartiteInstance) -> Result<BipartiteInstance> {
        instance.shifted(&self.deltas)
    }
}

/// Sensitivities divided by twice the task count, with infinite entries
/// replaced by the saturation cap.
#[derive(Debug, Clone, PartialEq)]
pub struct AllowableBound {
    pub perturbation: Perturbation,
    /// Edges whose sensitivity was infinite and got the capped value.
    pub saturated: Vec<Edge>,
}

pub fn allowable_bound(sensitivities: &SensitivityMatrix, num_tasks: usize) -> AllowableBound {
    allowable_bound_with_cap(sensitivities, num_tasks, DEFAULT_SATURATION_CAP)
}

/// `delta = s / 2N` on every edge. An infinite `s` only arises for an edge
/// every feasible matching uses (or none does), so any finite delta there is
/// still allowable; the cap keeps later arithmetic finite.
pub fn allowable_bound_with_cap(
    sensitivities: &SensitivityMatrix,
    num_tasks: usize,
    cap: f64,
) -> AllowableBound {
    let divisor = 2.0 * num_tasks.max(1) as f64;
    let mut saturated = Vec::new();
    let deltas = sensitivities.as_map().map(|e, &s| {
        let s = if s.is_finite() {
            s
        } else {
            saturated.push(e);
            cap.copysign(s)
        };
        s / divisor
    });
    AllowableBound {
        perturbation: Perturbation { deltas },
        saturated,
    }
}

/// A closed one-sided interval; the open side is `±inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn at_most(upper: f64) -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper,
        }
    }

    pub fn at_least(lower: f64) -> Self {
        Self {
            lower,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open_lo = self.lower == f64::NEG_INFINITY;
        let open_hi = self.upper == f64::INFINITY;
        write!(
            f,
            "{}{},{}{}",
            if open_lo { "(" } else { "[" },
            crate::io::format_ext(self.lower),
            crate::io::format_ext(self.upper),
            if open_hi { ")" } else { "]" },
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalTable {
    intervals: EdgeMap<Interval>,
}

impl IntervalTable {
    pub fn get(&self, edge: Edge) -> Option<Interval> {
        self.intervals.get(edge).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, Interval)> + '_ {
        self.intervals.iter().map(|(e, v)| (e, *v))
    }

    pub fn as_map(&self) -> &EdgeMap<Interval> {
        &self.intervals
    }

    /// Whether every delta of `perturbation` falls inside its edge's interval.
    pub fn contains(&self, perturbation: &Perturbation) -> bool {
        self.intervals.same_support(perturbation.as_map())
            && perturbation
                .iter()
                .all(|(e, d)| self.get(e).is_some_and(|iv| iv.contains(d)))
    }
}

/// Half-space extension of an allowable perturbation: assigned edges may only
/// go lower, unassigned edges only higher.
pub fn halfspace_intervals(perturbation: &Perturbation, optimum: &Assignment) -> IntervalTable {
    IntervalTable {
        intervals: perturbation.as_map().map(|e, &d| {
            if optimum.contains(e) {
                Interval::at_most(d)
            } else {
                Interval::at_least(d)
            }
        }),
    }
}

/// `optimum` is still a minimizer (ties allowed) after adding `perturbation`.
pub fn verify_allowable(
    instance: &BipartiteInstance,
    optimum: &Assignment,
    perturbation: &Perturbation,
) -> Result<bool> {
    optimum.validate_for(instance)?;
    let perturbed = perturbation.apply(instance)?;
    let ours = assignment_cost(&perturbed, optimum)?;
    let best = optimal_cost(&perturbed).ok_or(Error::Infeasible)?;
    Ok(ours <= best + tie_tolerance(best))
}
