//! Exhaustive enumeration of full matchings, used as a reference oracle.

use crate::assignment::{tie_tolerance, Assignment, BipartiteInstance, Edge};
use crate::error::{Error, Result};

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceOptimum {
    /// Every minimizer, sorted lexicographically by task-ordered agent list.
    pub optima: Vec<Assignment>,
    pub cost: f64,
}

/// Calls `visit` with every full matching of the instance (agent of each
/// task, total weight).
pub fn for_each_matching(instance: &BipartiteInstance, mut visit: impl FnMut(&[usize], f64)) {
    fn recurse(
        instance: &BipartiteInstance,
        task: usize,
        used: &mut [bool],
        chosen: &mut Vec<usize>,
        partial: f64,
        visit: &mut dyn FnMut(&[usize], f64),
    ) {
        if task == instance.num_tasks() {
            visit(chosen, partial);
            return;
        }
        for agent in 0..instance.num_agents() {
            if used[agent] {
                continue;
            }
            let Some(w) = instance.weight(Edge::new(agent, task)) else {
                continue;
            };
            used[agent] = true;
            chosen.push(agent);
            recurse(instance, task + 1, used, chosen, partial + w, visit);
            chosen.pop();
            used[agent] = false;
        }
    }
    let mut used = vec![false; instance.num_agents()];
    let mut chosen = Vec::with_capacity(instance.num_tasks());
    recurse(instance, 0, &mut used, &mut chosen, 0.0, &mut visit);
}

pub fn brute_force_solve(instance: &BipartiteInstance) -> Result<BruteForceOptimum> {
    brute_force_solve_capped(instance, DEFAULT_BRUTE_FORCE_CAP)
}

pub fn brute_force_solve_capped(
    instance: &BipartiteInstance,
    cap: usize,
) -> Result<BruteForceOptimum> {
    if instance.num_tasks() > cap {
        return Err(Error::CapExceeded {
            cap,
            tasks: instance.num_tasks(),
        });
    }
    let mut all: Vec<(Vec<usize>, f64)> = Vec::new();
    for_each_matching(instance, |agents, cost| all.push((agents.to_vec(), cost)));
    let best = all
        .iter()
        .map(|(_, c)| *c)
        .min_by(f64::total_cmp)
        .ok_or(Error::Infeasible)?;
    let mut optima = all
        .into_iter()
        .filter(|(_, c)| *c <= best + tie_tolerance(best))
        .map(|(a, _)| Assignment::from_task_agents(a))
        .collect::<Result<Vec<_>>>()?;
    optima.sort();
    Ok(BruteForceOptimum { optima, cost: best })
}
