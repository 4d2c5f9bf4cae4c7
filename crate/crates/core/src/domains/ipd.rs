//! Iterated prisoner's dilemma against a memory-one stochastic opponent.
//!
//! The state is the last joint outcome: `S` (agent cooperated, opponent
//! defected), `T` (agent defected, opponent cooperated), `R` (both
//! cooperated), `P` (both defected).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::mcbrl::{AffineEntry, Hypothesis, Prior, RowSpec, ScalarPrior, StartState, TaskSkeleton};
use crate::model::DiscreteMdp;

pub const S: usize = 0;
pub const T: usize = 1;
pub const R: usize = 2;
pub const P: usize = 3;
pub const COOPERATE: usize = 0;
pub const DEFECT: usize = 1;
pub const PAYOFF: [f64; 4] = [0.0, 5.0, 3.0, 1.0];
pub const DISCOUNT: f64 = 0.95;
/// Play starts as if both had cooperated.
pub const START: usize = R;

/// Tit-for-tat as a policy over states: cooperate iff the opponent just did.
pub const TIT_FOR_TAT: [usize; 4] = [DEFECT, COOPERATE, COOPERATE, DEFECT];
/// Win-stay lose-shift.
pub const PAVLOV: [usize; 4] = [DEFECT, DEFECT, COOPERATE, COOPERATE];

/// Probability that the opponent cooperates after each outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpdOpponent {
    pub p_s: f64,
    pub p_t: f64,
    pub p_r: f64,
    pub p_p: f64,
}

impl IpdOpponent {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p_s, self.p_t, self.p_r, self.p_p]
    }

    pub fn from_array(p: [f64; 4]) -> Self {
        Self {
            p_s: p[0],
            p_t: p[1],
            p_r: p[2],
            p_p: p[3],
        }
    }
}

/// Four independent uniform cooperation probabilities.
pub fn sample_opponent<G: Rng + ?Sized>(rng: &mut G) -> IpdOpponent {
    IpdOpponent::from_array([rng.random(), rng.random(), rng.random(), rng.random()])
}

/// Next state when the agent plays `action` and the opponent cooperates or not.
pub fn outcome(action: usize, opponent_cooperates: bool) -> usize {
    match (action, opponent_cooperates) {
        (COOPERATE, true) => R,
        (COOPERATE, false) => S,
        (_, true) => T,
        (_, false) => P,
    }
}

/// Agent skeleton with the four opponent parameters unknown, and the true MDP.
pub fn build_ipd(opponent: &IpdOpponent) -> (TaskSkeleton, DiscreteMdp) {
    let (ns, na) = (4, 2);
    let mut transition = Vec::new();
    let mut reward = vec![0.0; ns * na * ns];
    for s in 0..ns {
        for a in 0..na {
            transition.push(RowSpec::Parametric(vec![
                AffineEntry::param(outcome(a, true), s),
                AffineEntry::complement(outcome(a, false), s),
            ]));
            for s2 in 0..ns {
                reward[(s * na + a) * ns + s2] = PAYOFF[s2];
            }
        }
    }
    let skeleton = TaskSkeleton {
        num_states: ns,
        num_actions: na,
        num_observations: None,
        discount: DISCOUNT,
        reward,
        transition,
        observation: None,
        parameters: ["p_s", "p_t", "p_r", "p_p"].iter().map(|s| s.to_string()).collect(),
        start: StartState::Known(START),
    };
    let mdp = skeleton.mdp(&ipd_truth(opponent));
    (skeleton, mdp)
}

pub fn ipd_truth(opponent: &IpdOpponent) -> Hypothesis {
    Hypothesis {
        scalars: opponent.as_array().to_vec(),
        rows: Vec::new(),
    }
}

pub fn ipd_prior() -> Prior {
    Prior::new(vec![ScalarPrior::Uniform { lo: 0.0, hi: 1.0 }; 4], Vec::new()).expect("uniform prior")
}
