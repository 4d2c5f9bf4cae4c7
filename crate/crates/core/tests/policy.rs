mod common;

use common::{random_momdp, rng, tiger_known};
use mcbrl_core::domains::chain::{chain_prior, ChainSpec, ChainVariant};
use mcbrl_core::domains::build_chain;
use mcbrl_core::mcbrl::{build_bamdp, sample_hypotheses};
use mcbrl_core::model::belief_update_momdp;
use mcbrl_core::policy::{
    evaluate_graph, execute_graph, observation_symbols, regret_bound, required_samples, to_policy_graph, BoundError,
    BoundInputs, PolicyGraph,
};
use mcbrl_core::solver::{policy_action, solve, AlphaVector, LowerBound, SolveConfig};
use proptest::prelude::*;
use rand::Rng;

fn gap(g: f64) -> SolveConfig {
    SolveConfig {
        target_gap: Some(g),
        ..SolveConfig::default()
    }
}

fn graph(actions: Vec<usize>, edges: Vec<Vec<usize>>, symbols: usize) -> PolicyGraph {
    let n = actions.len();
    PolicyGraph {
        actions,
        edges,
        start_node: 0,
        symbols: (0..symbols).map(|o| (0, o)).collect(),
        synthetic: vec![false; n],
        nodes_before_pruning: n,
    }
}

#[test]
fn single_alpha_gives_a_self_looping_node() {
    let m = tiger_known(0.15);
    let mut r = solve(&m, &SolveConfig::with_backups(1));
    let mut lb = LowerBound::new(1, 2);
    lb.insert(AlphaVector {
        observed_state: 0,
        action: 0,
        values: vec![0.0, 0.0],
    });
    r.lower = lb;
    let g = to_policy_graph(&r, &m, 10);
    assert_eq!(g.num_nodes(), 1);
    assert_eq!(g.edges[0], vec![0; 2]);
    assert!(g.is_well_formed());
}

#[test]
fn graphs_have_one_edge_per_symbol() {
    let m = tiger_known(0.15);
    let r = solve(&m, &gap(0.01));
    for h in [1, 3, 10] {
        let g = to_policy_graph(&r, &m, h);
        assert!(g.is_well_formed());
        assert!(g.edges.iter().all(|e| e.len() == 2));
    }
    let spec = ChainSpec::new(ChainVariant::SemiTied);
    let (skeleton, _) = build_chain(&spec);
    let hyps = sample_hypotheses(&skeleton, &chain_prior(&spec, &skeleton), 10, &mut rng(1)).unwrap();
    let am = build_bamdp(&skeleton, &hyps).unwrap();
    let r = solve(&am.model, &gap(5.0));
    let g = to_policy_graph(&r, &am.model, 8);
    assert!(g.is_well_formed());
    assert_eq!(g.num_symbols(), observation_symbols(&am.model).len());
    assert!(g.edges.iter().all(|e| e.len() == g.num_symbols()));
    assert!(g.nodes_before_pruning >= g.num_nodes());
}

#[test]
fn tiger_graph_agrees_with_belief_tracking() {
    let m = tiger_known(0.15);
    let r = solve(&m, &gap(0.01));
    let horizon = 10;
    let g = to_policy_graph(&r, &m, horizon);
    let mut draws = rng(7);
    for _ in 0..100 {
        let obs: Vec<usize> = (0..horizon).map(|_| draws.random_range(0..2)).collect();
        let symbols: Vec<usize> = obs.iter().map(|&o| g.symbol_index(0, o).unwrap()).collect();
        let from_graph = execute_graph(&g, &symbols);
        let mut b = m.initial_hidden_belief();
        let mut tracked = vec![policy_action(&r, 0, &b)];
        for &o in &obs {
            let a = *tracked.last().unwrap();
            b = belief_update_momdp(&m, 0, &b, a, 0, o).unwrap();
            tracked.push(policy_action(&r, 0, &b));
        }
        assert_eq!(from_graph, tracked, "observations {obs:?}");
    }
}

#[test]
fn graph_value_sits_between_the_bounds() {
    let m = tiger_known(0.15);
    let r = solve(&m, &gap(0.01));
    let g = to_policy_graph(&r, &m, 20);
    let v = evaluate_graph(&g, &m, 1e-9, 10_000);
    let b0 = m.initial_hidden_belief();
    let value: f64 = v[g.start_node][0].iter().zip(b0.as_slice()).map(|(a, b)| a * b).sum();
    assert!(value <= r.upper_value + 1e-6, "{value} > {}", r.upper_value);
    assert!(value >= r.lower_value - 0.1, "{value} well below {}", r.lower_value);
}

#[test]
fn constant_graph_value_is_the_blind_policy_value() {
    let m = random_momdp(2, 2, 2, 2, 3);
    let symbols = observation_symbols(&m);
    let g = PolicyGraph {
        actions: vec![1],
        edges: vec![vec![0; symbols.len()]],
        start_node: 0,
        symbols,
        synthetic: vec![false],
        nodes_before_pruning: 1,
    };
    let v = evaluate_graph(&g, &m, 1e-12, 100_000);
    // One Bellman step of the blind policy must reproduce the values.
    let (nx, ny, _, _) = m.dims();
    for x in 0..nx {
        for y in 0..ny {
            let mut q = 0.0;
            for x2 in 0..nx {
                for y2 in 0..ny {
                    let t = m.transition(x, y, 1, x2, y2);
                    q += t * (m.reward(x, y, 1, x2, y2) + m.discount() * v[0][x2][y2]);
                }
            }
            assert!((q - v[0][x][y]).abs() < 1e-8);
        }
    }
}

#[test]
fn executing_simple_graphs() {
    let one = graph(vec![2], vec![vec![0, 0]], 2);
    assert_eq!(execute_graph(&one, &[0, 1, 1, 0]), vec![2; 5]);
    let alt = graph(vec![0, 1], vec![vec![1, 1], vec![0, 0]], 2);
    let trace = [0, 1, 0, 1];
    assert_eq!(execute_graph(&alt, &trace), vec![0, 1, 0, 1, 0]);
    assert_eq!(execute_graph(&alt, &trace), execute_graph(&alt, &trace));
    assert_eq!(execute_graph(&alt, &[]), vec![0]);
}

#[test]
fn adjacency_text_lists_every_node() {
    let alt = graph(vec![0, 1], vec![vec![1, 1], vec![0, 0]], 2);
    let text = alt.to_adjacency_text();
    assert!(text.starts_with("# nodes 2 symbols 2 start 0"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 2);
}

fn worked_example() -> BoundInputs {
    BoundInputs {
        policy_size: 1,
        num_observations: 2,
        num_actions: 2,
        k: 1000,
        tau: 0.1,
        gamma: 0.9,
        r_max: 1.0,
        delta: 0.0,
    }
}

#[test]
fn bound_worked_example() {
    assert!((regret_bound(&worked_example()).unwrap() - 1.8723).abs() < 1e-4);
}

#[test]
fn bound_tends_to_delta() {
    let inp = BoundInputs {
        delta: 0.25,
        k: usize::MAX / 4,
        ..worked_example()
    };
    assert!((regret_bound(&inp).unwrap() - 0.25).abs() < 1e-6);
}

#[test]
fn infeasible_target() {
    let inp = BoundInputs {
        delta: 0.5,
        ..worked_example()
    };
    assert!(matches!(required_samples(&inp, 0.5), Err(BoundError::Infeasible { .. })));
    let target = regret_bound(&worked_example()).unwrap();
    assert_eq!(required_samples(&worked_example(), target).unwrap(), 1000);
}

fn inputs() -> impl Strategy<Value = BoundInputs> {
    (1usize..50, 1usize..10, 1usize..6, 1usize..100_000, 0.01f64..0.99, 0.1f64..0.99, 0.0f64..100.0, 0.0f64..10.0)
        .prop_map(|(p, o, a, k, tau, gamma, r, d)| BoundInputs {
            policy_size: p,
            num_observations: o,
            num_actions: a,
            k,
            tau,
            gamma,
            r_max: r,
            delta: d,
        })
}

proptest! {
    #[test]
    fn bound_strictly_decreases_in_k(inp in inputs().prop_filter("positive scale", |i| i.r_max > 1e-3)) {
        let b1 = regret_bound(&inp).unwrap();
        let b2 = regret_bound(&BoundInputs { k: inp.k + 1, ..inp }).unwrap();
        prop_assert!(b2 < b1);
    }

    #[test]
    fn bound_is_monotone_in_sizes(inp in inputs()) {
        let b = regret_bound(&inp).unwrap();
        for bigger in [
            BoundInputs { policy_size: inp.policy_size + 1, ..inp },
            BoundInputs { num_observations: inp.num_observations + 1, ..inp },
            BoundInputs { num_actions: inp.num_actions + 1, ..inp },
            BoundInputs { r_max: inp.r_max + 1.0, ..inp },
        ] {
            prop_assert!(regret_bound(&bigger).unwrap() >= b);
        }
    }

    #[test]
    fn bound_decreases_in_tau_and_blows_up_with_gamma(inp in inputs().prop_filter("positive scale", |i| i.r_max > 1e-3)) {
        let b = regret_bound(&inp).unwrap();
        let looser = BoundInputs { tau: (inp.tau + 0.99) / 2.0, ..inp };
        prop_assert!(regret_bound(&looser).unwrap() < b);
        let mut last = b;
        for gamma in [(inp.gamma + 1.0) / 2.0, 1.0 - 1e-6, 1.0 - 1e-12] {
            let v = regret_bound(&BoundInputs { gamma, ..inp }).unwrap();
            prop_assert!(v > last);
            last = v;
        }
        prop_assert!(last - inp.delta > 1e6 * (b - inp.delta));
    }

    #[test]
    fn required_samples_is_minimal(inp in inputs().prop_filter("positive scale", |i| i.r_max > 1e-3), slack in 0.01f64..100.0) {
        let target = inp.delta + slack;
        let k = required_samples(&inp, target).unwrap();
        let at = |k: usize| regret_bound(&BoundInputs { k, ..inp }).unwrap();
        prop_assert!(at(k) <= target);
        if k > 1 {
            prop_assert!(at(k - 1) > target);
        }
    }

    #[test]
    fn random_graphs_stay_well_formed(seed in any::<u64>(), horizon in 0usize..6) {
        let m = random_momdp(2, 2, 2, 2, seed);
        let r = solve(&m, &SolveConfig { target_gap: Some(1e-3), max_backups: Some(200), ..SolveConfig::default() });
        let g = to_policy_graph(&r, &m, horizon);
        prop_assert!(g.is_well_formed());
        prop_assert!(g.edges.iter().all(|e| e.len() == g.num_symbols()));
    }
}

