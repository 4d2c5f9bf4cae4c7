mod common;

use common::rng;
use mcbrl_core::domains::chain::{ACTION_A, NUM_STATES};
use mcbrl_core::domains::ipd::{COOPERATE, P, R, S, T, TIT_FOR_TAT};
use mcbrl_core::domains::tiger::{episode_ends, LISTEN, OPEN_LEFT, OPEN_RIGHT};
use mcbrl_core::domains::{
    build_chain, build_ipd, build_tiger, sample_opponent, ChainSpec, ChainVariant, IpdOpponent, MdpEnvironment,
    PomdpEnvironment, QLearningAgent, StatePolicyAgent, TigerSpec,
};
use mcbrl_core::mcbrl::{run_online, Agent, Budget, Environment};
use mcbrl_core::model::{validate_model, DiscreteMdp};
use rand::Rng;

#[test]
fn chain_slip_frequency_matches_truth() {
    let mut spec = ChainSpec::new(ChainVariant::SemiTied);
    spec.true_slip = (0.3, 0.2);
    let (_, mdp) = build_chain(&spec);
    let mut env = MdpEnvironment::new(mdp, 0, 11);
    let steps = 100_000;
    let mut slips = 0;
    for _ in 0..steps {
        // Forward never lands in state 0, so landing there means a slip.
        if env.step(ACTION_A).state == 0 {
            slips += 1;
        }
    }
    let freq = slips as f64 / steps as f64;
    assert!((freq - 0.3).abs() < 0.01, "{freq}");
}

#[test]
fn chain_skeletons_are_valid() {
    for variant in [ChainVariant::SemiTied, ChainVariant::Full] {
        let (skeleton, mdp) = build_chain(&ChainSpec::new(variant));
        validate_model(&mdp).unwrap();
        assert_eq!(skeleton.num_states, NUM_STATES);
    }
}

#[test]
fn ipd_cooperation_frequency_matches_truth() {
    let opp = IpdOpponent::from_array([0.806, 0.108, 0.596, 0.185]);
    let (_, mdp) = build_ipd(&opp);
    validate_model(&mdp).unwrap();
    let mut env = MdpEnvironment::new(mdp, R, 3);
    let mut draws = rng(4);
    let mut visits = [0usize; 4];
    let mut coop = [0usize; 4];
    while visits.iter().any(|&v| v < 10_000) {
        let s = env.state();
        let a = draws.random_range(0..2);
        let s2 = env.step(a).state;
        visits[s] += 1;
        if s2 == R || s2 == T {
            coop[s] += 1;
        }
    }
    for s in [S, T, R, P] {
        let freq = coop[s] as f64 / visits[s] as f64;
        assert!((freq - opp.as_array()[s]).abs() < 0.02, "state {s}: {freq}");
    }
}

#[test]
fn opponent_sampling() {
    let mut g = rng(8);
    let n = 100_000;
    let mut sums = [0.0; 4];
    for _ in 0..n {
        for (s, p) in sums.iter_mut().zip(sample_opponent(&mut g).as_array()) {
            *s += p;
        }
    }
    for s in sums {
        assert!((s / n as f64 - 0.5).abs() < 0.01);
    }
    assert_eq!(sample_opponent(&mut rng(1)), sample_opponent(&mut rng(1)));
}

#[test]
fn tit_for_tat_against_a_cooperator_earns_three_per_step() {
    let (_, mdp) = build_ipd(&IpdOpponent::from_array([1.0; 4]));
    let mut env = MdpEnvironment::new(mdp, R, 0);
    let mut agent = StatePolicyAgent::new(TIT_FOR_TAT.to_vec(), R);
    let trace = run_online(&mut agent, &mut env, Budget::Steps(100), false);
    assert!(trace.actions.iter().all(|&a| a == COOPERATE));
    assert_eq!(trace.total_reward(), 300.0);
}

#[test]
fn tiger_dynamics_and_episodes() {
    let spec = TigerSpec::symmetric(0.15);
    let (_, pomdp) = build_tiger(&spec);
    for s in 0..2 {
        for a in [OPEN_LEFT, OPEN_RIGHT] {
            assert_eq!(pomdp.mdp.row(s, a), &[0.5, 0.5]);
        }
        assert_eq!(pomdp.mdp.t(s, LISTEN, s), 1.0);
    }
    assert_eq!(pomdp.mdp.r(0, OPEN_RIGHT, 0), 10.0);
    assert_eq!(pomdp.mdp.r(0, OPEN_LEFT, 0), -100.0);
    assert_eq!(pomdp.mdp.r(1, LISTEN, 1), -1.0);
    let mut env = PomdpEnvironment::new(pomdp, episode_ends(), 2);
    assert!(!env.step(LISTEN).episode_end);
    assert!(env.step(OPEN_LEFT).episode_end);
}

#[test]
fn tiger_listening_error_rate() {
    let (_, pomdp) = build_tiger(&TigerSpec::symmetric(0.15));
    let mut env = PomdpEnvironment::new(pomdp, episode_ends(), 5);
    let n = 100_000;
    let mut wrong = 0;
    for _ in 0..n {
        let step = env.step(LISTEN);
        if step.observation != step.state {
            wrong += 1;
        }
    }
    assert!((wrong as f64 / n as f64 - 0.15).abs() < 0.01);
}

#[test]
fn q_learning_finds_the_better_arm() {
    let bandit = DiscreteMdp {
        num_states: 1,
        num_actions: 2,
        transition: vec![1.0, 1.0],
        reward: vec![0.0, 1.0],
        discount: 0.9,
    };
    let mut env = MdpEnvironment::new(bandit, 0, 0);
    let mut agent = QLearningAgent::new(1, 2, 0, 0.1, 0.9, 6);
    run_online(&mut agent, &mut env, Budget::Steps(2000), false);
    let q = agent.q_values(0);
    assert!(q[1] > q[0]);
    assert!(agent.hidden_belief().is_none());
}
