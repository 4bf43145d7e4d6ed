use lapguard::sim::{distance, run_simulation, summarize, Policy, Scenario};
use lapguard::{solve_lap, BipartiteInstance};
use proptest::prelude::*;

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    (1usize..=4, 0usize..=1)
        .prop_flat_map(|(n, extra)| {
            let point = || (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y)| [x, y]);
            (
                proptest::collection::vec(point(), n + extra),
                proptest::collection::vec(point(), n),
                0.2f64..2.0,
                prop_oneof![Just(0.0), 0.0f64..0.5],
                any::<u64>(),
            )
        })
        .prop_map(|(agents, targets, speed, noise, seed)| Scenario {
            agent_positions: agents,
            target_positions: targets,
            speed,
            noise_bound: noise,
            seed,
            max_steps: 80,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn step_log_invariants(scenario in scenario_strategy()) {
        for policy in [Policy::Naive, Policy::Certified] {
            let log = run_simulation(&scenario, policy).unwrap();
            let mut positions_after = log.steps.iter().skip(1).map(|s| s.positions.clone()).collect::<Vec<_>>();
            positions_after.push(log.final_positions.clone());
            let mut summed = 0.0;
            for (rec, after) in log.steps.iter().zip(&positions_after) {
                prop_assert_eq!(rec.weights.len(), scenario.agent_positions.len());
                for (a, (p, q)) in rec.positions.iter().zip(after).enumerate() {
                    let d = distance(*p, *q);
                    prop_assert!(d <= scenario.speed + 1e-9);
                    if !rec.assignment.agents().contains(&a) {
                        prop_assert_eq!(p, q);
                    }
                    summed += d;
                }
                for (a, row) in rec.weights.iter().enumerate() {
                    for (t, w) in row.iter().enumerate() {
                        let truth = distance(rec.positions[a], scenario.target_positions[t]);
                        prop_assert!((w - truth).abs() <= scenario.noise_bound + 1e-9);
                    }
                }
            }
            prop_assert!((summed - log.totals.total_distance).abs() < 1e-6);
            if let Some(cert) = &log.certification {
                prop_assert_eq!(policy, Policy::Certified);
                for rec in log.steps.iter().filter(|s| s.step >= cert.step) {
                    prop_assert_eq!(&rec.assignment, &cert.assignment);
                    prop_assert!(rec.certified);
                }
                prop_assert_eq!(summarize(&log).reassignments_after_certification, 0);
            }
            if policy == Policy::Naive {
                prop_assert!(log.steps.iter().all(|s| !s.certified));
            }
            let replay = run_simulation(&scenario, policy).unwrap();
            prop_assert_eq!(summarize(&replay), summarize(&log));
        }
    }

    #[test]
    fn noiseless_runs_are_policy_independent(mut scenario in scenario_strategy()) {
        scenario.noise_bound = 0.0;
        let naive = run_simulation(&scenario, Policy::Naive).unwrap();
        let certified = run_simulation(&scenario, Policy::Certified).unwrap();
        prop_assert_eq!(naive.steps.len(), certified.steps.len());
        for (a, b) in naive.steps.iter().zip(&certified.steps) {
            prop_assert_eq!(&a.assignment, &b.assignment);
            prop_assert_eq!(&a.positions, &b.positions);
        }
        prop_assert_eq!(naive.final_positions, certified.final_positions);
    }
}

#[test]
fn crossing_pair_ground_truth() {
    let s = Scenario::crossing_pair(0.0, 1);
    let rows: Vec<Vec<f64>> = s
        .agent_positions
        .iter()
        .map(|&a| s.target_positions.iter().map(|&t| distance(a, t)).collect())
        .collect();
    let best = solve_lap(&BipartiteInstance::from_dense(&rows).unwrap()).unwrap();
    let log = run_simulation(&s, Policy::Certified).unwrap();
    assert!(log.totals.completed);
    assert_eq!(log.totals.ground_truth_optimal_distance, best.cost);
    let summary = summarize(&log);
    assert!(summary.optimality_gap.abs() < 1e-9);
}
