//! Evolution-strategy optimizer: the population rule, sampling statistics
//! against the requested distribution, convergence on standard benchmarks,
//! translation equivariance, bound handling, and degenerate-input safety.

mod common;

use qgan::optimizer::{
    angle_bounds, cost_statistics, default_angle_step, minimize, population_size, CmaesOptions,
    CmaesState, LogBase, ObjectiveSpec, Stagnation, StopReason,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn rastrigin(x: &[f64]) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    10.0 * x.len() as f64 + x.iter().map(|&v| v * v - 10.0 * (tau * v).cos()).sum::<f64>()
}

#[test]
fn population_rule_matches_the_formula() {
    for m in 1..=100usize {
        let natural = population_size(m, LogBase::Natural);
        assert_eq!(natural, 4 + (2.0 * (m as f64).ln()).floor() as usize, "natural, M={m}");
        let ten = population_size(m, LogBase::Ten);
        assert_eq!(ten, 4 + (2.0 * (m as f64).log10()).floor() as usize, "ten, M={m}");
        assert!(ten <= natural);
    }
    // spot values
    assert_eq!(population_size(3, LogBase::Natural), 6);
    assert_eq!(population_size(7, LogBase::Natural), 7);
    assert_eq!(population_size(9, LogBase::Ten), 5);
    assert_eq!(population_size(100, LogBase::Ten), 8);
}

#[test]
fn first_generation_samples_the_requested_gaussian() {
    // with identity covariance and no bounds, candidates are
    // mean + step * z with z standard normal
    let mean = vec![0.25f64, -1.0, 0.5, 2.0];
    let step = 0.5f64;
    let opts = CmaesOptions { population_size: Some(64), ..CmaesOptions::default() };
    let mut state = CmaesState::with_options(mean.clone(), step, 99, &opts).unwrap();
    let mut samples: Vec<Vec<f64>> = Vec::new();
    for _ in 0..100 {
        samples.extend(state.ask());
    }
    let n = samples.len() as f64;
    for j in 0..4 {
        let avg = samples.iter().map(|s| s[j]).sum::<f64>() / n;
        assert!((avg - mean[j]).abs() < 0.03, "coordinate {j}: mean {avg}");
        let var = samples.iter().map(|s| (s[j] - mean[j]) * (s[j] - mean[j])).sum::<f64>() / n;
        assert!((var.sqrt() - step).abs() < 0.03, "coordinate {j}: std {}", var.sqrt());
    }
    // coordinates are uncorrelated under the identity shape
    for a in 0..4 {
        for b in (a + 1)..4 {
            let cov = samples.iter().map(|s| (s[a] - mean[a]) * (s[b] - mean[b])).sum::<f64>()
                / n
                / (step * step);
            assert!(cov.abs() < 0.05, "corr({a},{b}) = {cov}");
        }
    }
}

#[test]
fn sphere_converges_within_the_evaluation_budget() {
    // ten dimensions, fresh start away from the optimum
    let mut state = CmaesState::new(vec![1.5f64; 10], 0.5, 4242).unwrap();
    let mut objective = ObjectiveSpec::unbounded(|x: &[f64]| sphere(x));
    let outcome = minimize(&mut state, &mut objective, 10_000, None).unwrap();
    assert!(outcome.best_cost < 1e-8, "best cost {}", outcome.best_cost);
    assert!(outcome.evaluations <= 10_000);
    // the running best is monotone non-increasing
    for pair in outcome.trace.windows(2) {
        assert!(pair[1].best_cost <= pair[0].best_cost);
    }
    // trace bookkeeping is dense and ordered
    assert_eq!(outcome.trace.len(), outcome.evaluations / state.population_size());
    for (i, row) in outcome.trace.iter().enumerate() {
        assert_eq!(row.generation, i + 1);
        assert!(row.mean_cost >= row.best_cost);
        assert!(row.cost_variance >= 0.0);
    }
}

#[test]
fn ill_conditioned_quadratic_requires_shape_adaptation() {
    // axis scales spanning three orders of magnitude; progress to 1e-6
    // needs the covariance to learn the scaling, step control alone stalls
    let scales: Vec<f64> = (0..6).map(|i| 10.0f64.powf(i as f64 / 5.0 * 3.0)).collect();
    let mut state = CmaesState::new(vec![1.0f64; 6], 0.3, 77).unwrap();
    let mut objective =
        ObjectiveSpec::unbounded(|x: &[f64]| x.iter().zip(&scales).map(|(v, s)| s * v * v).sum());
    let outcome = minimize(&mut state, &mut objective, 30_000, None).unwrap();
    assert!(outcome.best_cost < 1e-6, "best cost {}", outcome.best_cost);
}

#[test]
fn minimization_is_translation_equivariant() {
    // Trajectory-level equivariance is not well-defined in floating point
    // (a near-identity covariance has no unique eigenbasis, so sampling
    // directions may differ macroscopically between runs), so check the
    // parts that are: the first population is an exact offset, one update
    // under identical rankings preserves the offset, and full runs land on
    // the respective optima.
    let shift = [0.3f64, -1.2, 0.8, 2.1, -0.5];
    let seed = 31337;

    // (a) identical seeds give first populations offset exactly by the shift
    let mut state_a = CmaesState::new(vec![1.0f64; 5], 0.4, seed).unwrap();
    let start_b: Vec<f64> = shift.iter().map(|t| 1.0 + t).collect();
    let mut state_b = CmaesState::new(start_b, 0.4, seed).unwrap();
    let pop_a = state_a.ask();
    let pop_b = state_b.ask();
    for (xa, xb) in pop_a.iter().zip(&pop_b) {
        for j in 0..5 {
            assert!((xb[j] - shift[j] - xa[j]).abs() < 1e-12);
        }
    }

    // (b) one update with identical cost rankings keeps the offset and the
    // step size in lockstep
    let costs: Vec<f64> = pop_a.iter().map(|x| sphere(x)).collect();
    state_a.tell(&pop_a, &costs).unwrap();
    state_b.tell(&pop_b, &costs).unwrap();
    for ((mb, s), ma) in state_b.mean().iter().zip(&shift).zip(state_a.mean()) {
        assert!((mb - s - ma).abs() < 1e-12);
    }
    assert!((state_a.step_size() - state_b.step_size()).abs() < 1e-12 * state_a.step_size());

    // (c) the shifted problem is exactly as solvable as the original
    let budget = 6_000;
    let mut fresh_a = CmaesState::new(vec![1.0f64; 5], 0.4, seed).unwrap();
    let mut obj_a = ObjectiveSpec::unbounded(|x: &[f64]| sphere(x));
    let out_a = minimize(&mut fresh_a, &mut obj_a, budget, None).unwrap();
    let start_b: Vec<f64> = shift.iter().map(|t| 1.0 + t).collect();
    let mut fresh_b = CmaesState::new(start_b, 0.4, seed).unwrap();
    let mut obj_b = ObjectiveSpec::unbounded(|x: &[f64]| {
        x.iter().zip(&shift).map(|(v, t)| (v - t) * (v - t)).sum()
    });
    let out_b = minimize(&mut fresh_b, &mut obj_b, budget, None).unwrap();
    assert!(out_a.best_cost < 1e-10, "unshifted best {}", out_a.best_cost);
    assert!(out_b.best_cost < 1e-10, "shifted best {}", out_b.best_cost);
    for (pa, (pb, s)) in out_a.best_params.iter().zip(out_b.best_params.iter().zip(&shift)) {
        assert!(pa.abs() < 1e-4);
        assert!((pb - s).abs() < 1e-4);
    }
}

#[test]
fn rugged_landscape_success_rate_is_stable() {
    // Five-dimensional multimodal benchmark with a lattice of local minima;
    // a large population finds the global basin from most seeds. Settings
    // and the pin are calibrated: these seeds give 19/20 global hits with
    // the worst stranded run one lattice cell out (cost about 1).
    let mut hits = 0;
    let mut in_basin = 0;
    for seed in 0..20u64 {
        let opts = CmaesOptions { population_size: Some(200), ..CmaesOptions::default() };
        let mut state = CmaesState::with_options(vec![2.5f64; 5], 3.0, seed, &opts).unwrap();
        let mut objective =
            ObjectiveSpec::new(|x: &[f64]| rastrigin(x), Some(vec![(-5.12, 5.12); 5]));
        let outcome = minimize(&mut state, &mut objective, 80_000, None).unwrap();
        // local minima sit near lattice points with cost close to the
        // number of displaced coordinates; 0.5 splits basin membership
        if outcome.best_cost < 1e-8 {
            hits += 1;
        }
        if outcome.best_cost < 0.5 {
            in_basin += 1;
        }
        assert!(outcome.best_cost < 30.0, "seed {seed} stranded at {}", outcome.best_cost);
        for pair in outcome.trace.windows(2) {
            assert!(pair[1].best_cost <= pair[0].best_cost);
        }
    }
    assert_eq!(hits, in_basin, "runs inside the basin should polish to the optimum");
    assert!(hits >= 16, "only {hits}/20 seeds reached the global minimum");
}

#[test]
fn stagnation_rule_stops_early() {
    let mut state = CmaesState::new(vec![0.5f64; 4], 0.3, 5).unwrap();
    let mut objective = ObjectiveSpec::unbounded(|_: &[f64]| 5.0);
    let stagnation = Stagnation { tolerance: 1e-12, window: 10 };
    let outcome = minimize(&mut state, &mut objective, 100_000, Some(stagnation)).unwrap();
    assert_eq!(outcome.stop, StopReason::Stagnated);
    assert_eq!(outcome.best_cost, 5.0);
    // window + 1 generations is the earliest possible detection
    assert_eq!(outcome.trace.len(), 11);
    assert!(outcome.evaluations == 11 * state.population_size());
}

#[test]
fn budget_run_reports_exhaustion() {
    let mut state = CmaesState::new(vec![0.5f64; 4], 0.3, 6).unwrap();
    let pop = state.population_size();
    let mut objective = ObjectiveSpec::unbounded(|x: &[f64]| sphere(x));
    let outcome = minimize(&mut state, &mut objective, pop * 3 + 1, None).unwrap();
    assert_eq!(outcome.stop, StopReason::BudgetExhausted);
    assert_eq!(outcome.evaluations, pop * 3);
    assert_eq!(outcome.trace.len(), 3);
}

#[test]
fn bounded_search_never_leaves_the_box() {
    let dim = 6;
    let mut violations = 0usize;
    let best_in_box;
    {
        let mut state = CmaesState::new(vec![0.0f64; dim], default_angle_step(), 8).unwrap();
        let mut objective = ObjectiveSpec::angles(dim, |x: &[f64]| {
            for &v in x {
                if !(-std::f64::consts::PI..std::f64::consts::PI).contains(&v) {
                    violations += 1;
                }
            }
            // optimum outside the box pushes the search against the wall
            x.iter().map(|v| (v - 4.0) * (v - 4.0)).sum()
        });
        let outcome = minimize(&mut state, &mut objective, 5_000, None).unwrap();
        best_in_box = outcome
            .best_params
            .iter()
            .all(|v| (-std::f64::consts::PI..std::f64::consts::PI).contains(v));
        // the best the box allows is the wall itself
        let wall = dim as f64 * (std::f64::consts::PI - 4.0) * (std::f64::consts::PI - 4.0);
        assert!(outcome.best_cost < wall + 0.05, "best {} vs wall {wall}", outcome.best_cost);
    }
    assert_eq!(violations, 0);
    assert!(best_in_box);
}

#[test]
fn angle_bounds_cover_every_coordinate() {
    let bounds: Vec<(f64, f64)> = angle_bounds(5);
    assert_eq!(bounds.len(), 5);
    for (lo, hi) in bounds {
        assert_eq!(lo, -std::f64::consts::PI);
        assert_eq!(hi, std::f64::consts::PI);
    }
    let step: f64 = default_angle_step();
    assert!((step - 0.3 * std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn non_finite_costs_are_ranked_worst() {
    // the objective is poisoned on half the space; the search must still
    // converge into the clean half and never record a non-finite best
    let mut state = CmaesState::new(vec![0.8f64; 3], 0.5, 9).unwrap();
    let mut objective = ObjectiveSpec::unbounded(|x: &[f64]| {
        if x[0] > 0.5 {
            f64::NAN
        } else {
            sphere(x)
        }
    });
    let outcome = minimize(&mut state, &mut objective, 5_000, None).unwrap();
    assert!(outcome.best_cost.is_finite());
    assert!(outcome.best_cost < 1e-6, "best cost {}", outcome.best_cost);
    assert!(outcome.best_params[0] <= 0.5);
}

#[test]
fn flat_objective_keeps_the_state_finite() {
    // a constant objective gives the step-size path nothing but noise;
    // the step must stay capped and the sampled candidates finite
    let dim = 6;
    let mut state = CmaesState::new(vec![0.0f64; dim], default_angle_step(), 10).unwrap();
    state.set_bounds(Some(angle_bounds(dim))).unwrap();
    let span = 2.0 * std::f64::consts::PI;
    for _ in 0..300 {
        let population = state.ask();
        for candidate in &population {
            for &v in candidate {
                assert!(v.is_finite());
            }
        }
        let costs = vec![1.0f64; population.len()];
        state.tell(&population, &costs).unwrap();
        assert!(state.step_size().is_finite());
        assert!(state.step_size() <= span * (1.0 + 1e-12), "step {}", state.step_size());
        for &m in state.mean() {
            assert!(m.is_finite());
        }
    }
}

#[test]
fn unbounded_flat_objective_hits_the_hard_step_cap() {
    let initial_step = 0.1f64;
    let mut state = CmaesState::new(vec![0.0f64; 4], initial_step, 11).unwrap();
    for _ in 0..200 {
        let population = state.ask();
        let costs = vec![2.0f64; population.len()];
        state.tell(&population, &costs).unwrap();
        assert!(state.step_size().is_finite());
    }
    let cap = initial_step * 1e12;
    assert!(state.step_size() <= cap * (1.0 + 1e-12));
    for &m in state.mean() {
        assert!(m.is_finite());
    }
}

#[test]
fn constructor_and_tell_validate_their_inputs() {
    assert!(CmaesState::new(Vec::<f64>::new(), 0.3, 0).is_err());
    assert!(CmaesState::new(vec![0.0f64; 3], 0.0, 0).is_err());
    assert!(CmaesState::new(vec![0.0f64; 3], -1.0, 0).is_err());
    assert!(CmaesState::new(vec![0.0f64; 3], f64::NAN, 0).is_err());
    let opts = CmaesOptions { population_size: Some(1), ..CmaesOptions::default() };
    assert!(CmaesState::with_options(vec![0.0f64; 3], 0.3, 0, &opts).is_err());

    let mut state = CmaesState::new(vec![0.0f64; 3], 0.3, 0).unwrap();
    let pop = state.ask();
    assert!(state.tell(&pop[..1], &[0.0]).is_err());
    let bad_costs = vec![0.0; pop.len() + 1];
    assert!(state.tell(&pop, &bad_costs).is_err());
    assert!(state.set_bounds(Some(vec![(0.0, 1.0); 2])).is_err());
    assert!(state.set_bounds(Some(vec![(1.0, -1.0); 3])).is_err());

    // budget below one population is rejected
    let mut objective = ObjectiveSpec::unbounded(|x: &[f64]| sphere(x));
    let mut fresh = CmaesState::new(vec![0.0f64; 3], 0.3, 0).unwrap();
    let too_small = fresh.population_size() - 1;
    assert!(minimize(&mut fresh, &mut objective, too_small, None).is_err());
}

#[test]
fn cost_statistics_match_direct_computation() {
    let costs = [3.0f64, 1.0, 4.0, 1.0, 5.0];
    let (mean, var) = cost_statistics(&costs);
    assert!((mean - 2.8).abs() < 1e-15);
    let direct =
        costs.iter().map(|c| (c - 2.8) * (c - 2.8)).sum::<f64>() / costs.len() as f64;
    assert!((var - direct).abs() < 1e-15);
}

#[test]
fn seeded_runs_are_reproducible() {
    let run = || {
        let mut state = CmaesState::new(vec![1.0f64; 4], 0.4, 12345).unwrap();
        let mut objective = ObjectiveSpec::angles(4, |x: &[f64]| {
            x.iter().enumerate().map(|(i, v)| (v - 0.1 * i as f64).powi(2)).sum()
        });
        minimize(&mut state, &mut objective, 2_000, None).unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.best_params, b.best_params);
    assert_eq!(a.best_cost, b.best_cost);
    assert_eq!(a.trace.len(), b.trace.len());
    for (x, y) in a.trace.iter().zip(&b.trace) {
        assert_eq!(x.best_cost, y.best_cost);
        assert_eq!(x.mean_cost, y.mean_cost);
    }
}

#[test]
fn log_base_ten_shrinks_the_population() {
    let dim = 31; // generator parameter count for five qubits
    let natural = CmaesState::new(vec![0.0f64; dim], 0.3, 0).unwrap();
    assert_eq!(natural.population_size(), population_size(dim, LogBase::Natural));
    let opts = CmaesOptions { log_base: LogBase::Ten, ..CmaesOptions::default() };
    let ten = CmaesState::with_options(vec![0.0f64; dim], 0.3, 0, &opts).unwrap();
    assert_eq!(ten.population_size(), population_size(dim, LogBase::Ten));
    assert!(ten.population_size() < natural.population_size());
}

#[test]
fn distant_optimum_is_still_reached() {
    // start far away with a small step: step-size adaptation must grow
    // the step rather than crawl
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let target: Vec<f64> = (0..5).map(|_| rng.random_range(-8.0..8.0)).collect();
    let mut state = CmaesState::new(vec![0.0f64; 5], 0.05, 13).unwrap();
    let mut objective = ObjectiveSpec::unbounded(|x: &[f64]| {
        x.iter().zip(&target).map(|(v, t)| (v - t) * (v - t)).sum()
    });
    let outcome = minimize(&mut state, &mut objective, 20_000, None).unwrap();
    assert!(outcome.best_cost < 1e-8, "best cost {}", outcome.best_cost);
}
