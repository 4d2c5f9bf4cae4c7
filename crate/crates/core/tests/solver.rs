mod common;

use common::{brute_force_backup, random_belief, random_momdp, rng, tiger_grid_oracle, tiger_known};
use mcbrl_core::domains::tiger::{tiger_prior, LISTEN, OPEN_RIGHT};
use mcbrl_core::domains::{build_tiger, TigerSpec};
use mcbrl_core::mcbrl::{build_bapomdp, sample_hypotheses};
use mcbrl_core::model::{HiddenBelief, MomdpModel, RewardKernel};
use mcbrl_core::solver::{
    initialize_bounds, point_backup, policy_action, read_policy, solve, write_policy, AlphaVector, LowerBound,
    SolveConfig,
};
use proptest::prelude::*;
use rand::Rng;

fn gap(g: f64) -> SolveConfig {
    SolveConfig {
        target_gap: Some(g),
        ..SolveConfig::default()
    }
}

fn tiger_adaptive(k: usize, seed: u64) -> MomdpModel {
    let spec = TigerSpec::symmetric(0.15);
    let (skeleton, _) = build_tiger(&spec);
    let hyps = sample_hypotheses(&skeleton, &tiger_prior(&spec), k, &mut rng(seed)).unwrap();
    build_bapomdp(&skeleton, &hyps).unwrap().model
}

#[test]
fn tiger_value_matches_grid_oracle() {
    let oracle = tiger_grid_oracle(0.15, 0.95, 1e-3);
    let r = solve(&tiger_known(0.15), &gap(0.1));
    let v = oracle(0.5);
    assert!(r.delta <= 0.1, "gap {}", r.delta);
    assert!((r.lower_value - v).abs() <= 0.1, "lower {} oracle {v}", r.lower_value);
    assert!(r.upper_value >= v - 0.1);
}

#[test]
fn tiger_relaxation_upper_bounds_the_oracle() {
    let oracle = tiger_grid_oracle(0.15, 0.95, 1e-3);
    let m = tiger_known(0.15);
    let (_, upper) = initialize_bounds(&m);
    assert!(upper.value(0, &[0.5, 0.5]) >= oracle(0.5));
}

#[test]
fn tiger_actions_at_extreme_and_uniform_beliefs() {
    let m = tiger_known(0.15);
    let r = solve(&m, &gap(0.01));
    let sure_left = HiddenBelief::new(vec![0.99, 0.01]).unwrap();
    assert_eq!(policy_action(&r, 0, &sure_left), OPEN_RIGHT);
    assert_eq!(policy_action(&r, 0, &HiddenBelief::uniform(2)), LISTEN);
}

#[test]
fn single_alpha_gives_its_action_everywhere() {
    let m = tiger_known(0.15);
    let mut r = solve(&m, &SolveConfig::with_backups(1));
    let mut lb = LowerBound::new(1, 2);
    lb.insert(AlphaVector {
        observed_state: 0,
        action: 2,
        values: vec![1.0, -1.0],
    });
    r.lower = lb;
    let mut g = rng(3);
    for _ in 0..50 {
        let b = HiddenBelief::new(random_belief(2, &mut g)).unwrap();
        assert_eq!(policy_action(&r, 0, &b), 2);
    }
}

#[test]
fn single_action_closes_the_gap() {
    let m = random_momdp(3, 3, 1, 2, 17);
    let r = solve(&m, &gap(1e-6));
    assert!(r.delta <= 1e-6, "gap {}", r.delta);
    // Policy evaluation in closed form: (I − γP)v = r over flat states.
    let flat = m.to_flat_pomdp();
    let ns = flat.num_states();
    let g = m.discount();
    let mut a = vec![vec![0.0; ns + 1]; ns];
    for s in 0..ns {
        a[s][s] += 1.0;
        for s2 in 0..ns {
            a[s][s2] -= g * flat.mdp.t(s, 0, s2);
            a[s][ns] += flat.mdp.t(s, 0, s2) * flat.mdp.r(s, 0, s2);
        }
    }
    for c in 0..ns {
        let p = (c..ns).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        for r in 0..ns {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=ns {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let (_, ny, _, _) = m.dims();
    let x0 = m.initial_observed();
    let b0 = m.initial_hidden_belief();
    let exact: f64 = (0..ny).map(|y| b0.as_slice()[y] * a[x0 * ny + y][ns] / a[x0 * ny + y][x0 * ny + y]).sum();
    assert!((r.lower_value - exact).abs() < 1e-5, "{} vs {exact}", r.lower_value);
}

#[test]
fn constant_reward_gives_geometric_value() {
    let m = random_momdp(2, 3, 2, 2, 5);
    let mut parts = m.into_parts();
    parts.reward.iter_mut().for_each(|r| *r = RewardKernel::Constant(2.0));
    let m = MomdpModel::new(parts).unwrap();
    let (lower, upper) = initialize_bounds(&m);
    let b = m.initial_hidden_belief();
    let x = m.initial_observed();
    let expect = 2.0 / (1.0 - m.discount());
    assert!((lower.value(x, b.as_slice()) - expect).abs() < 1e-6);
    assert!((upper.value(x, b.as_slice()) - expect).abs() < 1e-6);
}

#[test]
fn doubling_backups_never_increases_delta() {
    let m = tiger_adaptive(20, 1);
    let mut last = f64::INFINITY;
    for n in [25, 50, 100, 200, 400] {
        let r = solve(&m, &SolveConfig::with_backups(n));
        assert!(r.delta <= last + 1e-9, "{n} backups: {} after {last}", r.delta);
        last = r.delta;
    }
}

#[test]
fn block_bound_stays_above_a_converged_lower_bound() {
    let m = tiger_adaptive(8, 2);
    let reference = solve(
        &m,
        &SolveConfig {
            target_gap: Some(1e-3),
            max_backups: Some(3_000),
            block_bounds: false,
            ..SolveConfig::default()
        },
    );
    let blocked = solve(&m, &SolveConfig::with_backups(1));
    assert!(blocked.upper_value >= reference.lower_value - 1e-9);
    // Per-block solves make the bound much tighter than the plain start.
    let plain = solve(
        &m,
        &SolveConfig {
            block_bounds: false,
            ..SolveConfig::with_backups(1)
        },
    );
    assert!(blocked.upper_value < plain.upper_value);
}

#[test]
fn corner_backup_is_a_fixed_point_once_optimal() {
    let m = tiger_known(0.15);
    let r = solve(&m, &gap(1e-4));
    let corner = HiddenBelief::point(2, 0);
    let before = r.lower.value(0, corner.as_slice());
    let after = point_backup(&m, &r.lower, 0, &corner).value(corner.as_slice());
    assert!((after - before).abs() < 1e-3, "{before} → {after}");
}

#[test]
fn policy_file_round_trip() {
    let r = solve(&tiger_known(0.15), &gap(0.1));
    let file = read_policy(&write_policy(&r)).unwrap();
    assert_eq!(file.lower_bound().unwrap(), r.lower);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn backup_matches_exhaustive_enumeration(seed in any::<u64>(), nx in 1usize..=2, na in 1usize..=3, no in 1usize..=3) {
        let m = random_momdp(nx, 2, na, no, seed);
        let mut g = rng(seed ^ 1);
        let (mut lower, _) = initialize_bounds(&m);
        // A few extra vectors so the per-observation choice matters.
        for _ in 0..3 {
            let x = g.random_range(0..nx);
            let b = HiddenBelief::new(random_belief(2, &mut g)).unwrap();
            let alpha = point_backup(&m, &lower, x, &b);
            lower.insert(alpha);
        }
        let x = g.random_range(0..nx);
        let b = random_belief(2, &mut g);
        let alpha = point_backup(&m, &lower, x, &HiddenBelief::new(b.clone()).unwrap());
        let brute = brute_force_backup(&m, &lower, x, &b);
        prop_assert!((alpha.value(&b) - brute).abs() < 1e-9, "{} vs {}", alpha.value(&b), brute);
        prop_assert!(alpha.value(&b) >= lower.value(x, &b) - 1e-9);
    }

    #[test]
    fn sandwich_holds_everywhere(seed in any::<u64>(), nx in 1usize..=3, ny in 1usize..=3) {
        let m = random_momdp(nx, ny, 2, 2, seed);
        let r = solve(&m, &SolveConfig { target_gap: Some(1e-3), max_backups: Some(300), ..SolveConfig::default() });
        prop_assert!(r.max_sandwich_violation <= 1e-9);
        prop_assert!(r.delta >= -1e-9);
        let mut g = rng(seed);
        for _ in 0..200 {
            let x = g.random_range(0..nx);
            let b = random_belief(ny, &mut g);
            prop_assert!(r.lower.value(x, &b) <= r.upper.value(x, &b) + 1e-9);
        }
    }

    #[test]
    fn bounds_move_monotonically(seed in any::<u64>()) {
        let m = random_momdp(2, 3, 2, 2, seed);
        let r = solve(&m, &SolveConfig { target_gap: Some(1e-4), max_backups: Some(400), ..SolveConfig::default() });
        for w in r.history.windows(2) {
            prop_assert!(w[1].lower >= w[0].lower - 1e-9);
            prop_assert!(w[1].upper <= w[0].upper + 1e-9);
        }
    }

    #[test]
    fn pruning_keeps_the_pointwise_max(seed in any::<u64>()) {
        let mut g = rng(seed);
        let mut lb = LowerBound::new(1, 3);
        let mut all = Vec::new();
        for i in 0..30 {
            let values: Vec<f64> = (0..3).map(|_| g.random_range(-5.0..5.0)).collect();
            all.push(values.clone());
            lb.insert(AlphaVector { observed_state: 0, action: i % 2, values });
        }
        for _ in 0..200 {
            let b = random_belief(3, &mut g);
            let brute = all.iter().map(|v| v.iter().zip(&b).map(|(a, p)| a * p).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((lb.value(0, &b) - brute).abs() < 1e-9);
        }
    }
}
