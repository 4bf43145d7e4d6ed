//! Test-only oracles and generators, independent of the solver code paths.
#![allow(dead_code)]

use itertools::Itertools;
use lapguard::{BipartiteInstance, Edge};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn worked_example() -> BipartiteInstance {
    BipartiteInstance::from_dense(&[[91.0, 33.0, 15.0], [5.0, 86.0, 92.0], [85.0, 9.0, 42.0]])
        .unwrap()
}

/// All full matchings as (agent of each task, cost), by plain enumeration of
/// ordered agent selections.
pub fn all_matchings(inst: &BipartiteInstance) -> Vec<(Vec<usize>, f64)> {
    (0..inst.num_agents())
        .permutations(inst.num_tasks())
        .filter_map(|agents| {
            let mut cost = 0.0;
            for (t, &a) in agents.iter().enumerate() {
                cost += inst.weight(Edge::new(a, t))?;
            }
            Some((agents, cost))
        })
        .collect()
}

pub fn oracle_optimum(inst: &BipartiteInstance) -> Option<(Vec<usize>, f64)> {
    all_matchings(inst)
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)))
}

/// Element-wise sensitivity of every edge by enumeration: the cheapest
/// matching with the edge's membership flipped, against the reference.
pub fn oracle_sensitivities(inst: &BipartiteInstance, reference: &[usize]) -> Vec<(Edge, f64)> {
    let matchings = all_matchings(inst);
    let base: f64 = reference
        .iter()
        .enumerate()
        .map(|(t, &a)| inst.weight(Edge::new(a, t)).unwrap())
        .sum();
    inst.edges()
        .map(|e| {
            let assigned = reference[e.task] == e.agent;
            let best = matchings
                .iter()
                .filter(|(m, _)| (m[e.task] == e.agent) != assigned)
                .map(|(_, c)| *c)
                .min_by(f64::total_cmp);
            let s = match (assigned, best) {
                (true, Some(c)) => c - base,
                (true, None) => f64::INFINITY,
                (false, Some(c)) => base - c,
                (false, None) => f64::NEG_INFINITY,
            };
            (e, s)
        })
        .collect()
}

/// Whether `reference` is among the minimizers, by enumeration.
pub fn oracle_is_optimal(inst: &BipartiteInstance, reference: &[usize], tol: f64) -> bool {
    let ours: f64 = reference
        .iter()
        .enumerate()
        .map(|(t, &a)| inst.weight(Edge::new(a, t)).unwrap())
        .sum();
    all_matchings(inst).iter().all(|(_, c)| ours <= c + tol)
}

pub fn random_integer_instance(
    rng: &mut ChaCha8Rng,
    agents: usize,
    tasks: usize,
) -> BipartiteInstance {
    let rows: Vec<Vec<f64>> = (0..agents)
        .map(|_| (0..tasks).map(|_| rng.gen_range(0..=100) as f64).collect())
        .collect();
    BipartiteInstance::from_dense(&rows).unwrap()
}

/// Square integer instances of size 2..=6 with weights in [0, 100] whose
/// optimum is unique (enforced by rejection against the oracle).
pub fn unique_square_instances(seed: u64, count: usize) -> Vec<BipartiteInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(2..=6);
        let inst = random_integer_instance(&mut rng, n, n);
        let matchings = all_matchings(&inst);
        let best = matchings.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        if matchings.iter().filter(|m| m.1 == best).count() == 1 {
            out.push(inst);
        }
    }
    out
}
