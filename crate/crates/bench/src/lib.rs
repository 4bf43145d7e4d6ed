//! Shared instance generators for the benchmarks.

use lapguard::BipartiteInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense `agents x tasks` instance with uniform real weights in `[0, 100)`.
/// Continuous weights make a tied optimum vanishingly unlikely.
pub fn uniform_instance(agents: usize, tasks: usize, seed: u64) -> BipartiteInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..agents)
        .map(|_| (0..tasks).map(|_| rng.gen_range(0.0..100.0)).collect())
        .collect();
    BipartiteInstance::from_dense(&rows).expect("agents >= tasks")
}

/// Random points in the unit square for agents and targets; weights are
/// Euclidean distances.
pub fn geometric_instance(n: usize, seed: u64) -> BipartiteInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points =
        |k: usize| -> Vec<[f64; 2]> { (0..k).map(|_| [rng.gen(), rng.gen()]).collect() };
    let agents = points(n);
    let targets = points(n);
    let rows: Vec<Vec<f64>> = agents
        .iter()
        .map(|a| {
            targets
                .iter()
                .map(|t| (a[0] - t[0]).hypot(a[1] - t[1]))
                .collect()
        })
        .collect();
    BipartiteInstance::from_dense(&rows).expect("square")
}
