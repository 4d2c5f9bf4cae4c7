//! The Tiger problem with unknown listening error rates.

use serde::{Deserialize, Serialize};

use crate::mcbrl::{AffineEntry, Hypothesis, Prior, RowSpec, ScalarPrior, StartState, TaskSkeleton};
use crate::model::DiscretePomdp;

pub const TIGER_LEFT: usize = 0;
pub const TIGER_RIGHT: usize = 1;
pub const LISTEN: usize = 0;
pub const OPEN_LEFT: usize = 1;
pub const OPEN_RIGHT: usize = 2;
pub const HEAR_LEFT: usize = 0;
pub const HEAR_RIGHT: usize = 1;

pub const LISTEN_COST: f64 = -1.0;
pub const PENALTY: f64 = -100.0;
pub const TREASURE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TigerSpec {
    /// Probability of hearing the wrong side when the tiger is left / right.
    pub true_error_rates: (f64, f64),
    /// Model a single error rate shared by both sides instead of two.
    #[serde(default)]
    pub shared_rate: bool,
    pub discount: f64,
    /// Beta prior on each unknown error rate.
    pub prior: (f64, f64),
}

impl TigerSpec {
    pub fn symmetric(error_rate: f64) -> Self {
        Self {
            true_error_rates: (error_rate, error_rate),
            shared_rate: false,
            discount: 0.95,
            prior: (3.0, 5.0),
        }
    }
}

/// Actions that end an episode.
pub fn episode_ends() -> Vec<bool> {
    vec![false, true, true]
}

/// Agent skeleton with unknown listening rows, and the true POMDP.
pub fn build_tiger(spec: &TigerSpec) -> (TaskSkeleton, DiscretePomdp) {
    let (ns, na) = (2, 3);
    let right_param = if spec.shared_rate { 0 } else { 1 };
    let mut transition = Vec::new();
    let mut observation = Vec::new();
    let mut reward = vec![0.0; ns * na * ns];
    for s in 0..ns {
        for a in 0..na {
            transition.push(RowSpec::Known(if a == LISTEN {
                let mut row = vec![0.0; ns];
                row[s] = 1.0;
                row
            } else {
                vec![0.5, 0.5]
            }));
            let r = match (a, s) {
                (LISTEN, _) => LISTEN_COST,
                (OPEN_LEFT, TIGER_LEFT) | (OPEN_RIGHT, TIGER_RIGHT) => PENALTY,
                _ => TREASURE,
            };
            for s2 in 0..ns {
                reward[(s * na + a) * ns + s2] = r;
            }
        }
    }
    for s2 in 0..ns {
        for a in 0..na {
            observation.push(if a != LISTEN {
                RowSpec::Known(vec![0.5, 0.5])
            } else if s2 == TIGER_LEFT {
                RowSpec::Parametric(vec![AffineEntry::complement(HEAR_LEFT, 0), AffineEntry::param(HEAR_RIGHT, 0)])
            } else {
                RowSpec::Parametric(vec![
                    AffineEntry::param(HEAR_LEFT, right_param),
                    AffineEntry::complement(HEAR_RIGHT, right_param),
                ])
            });
        }
    }
    let parameters = if spec.shared_rate {
        vec!["error_rate".to_string()]
    } else {
        vec!["error_rate_left".to_string(), "error_rate_right".to_string()]
    };
    let skeleton = TaskSkeleton {
        num_states: ns,
        num_actions: na,
        num_observations: Some(2),
        discount: spec.discount,
        reward,
        transition,
        observation: Some(observation),
        parameters,
        start: StartState::Distribution(vec![0.5, 0.5]),
    };
    let truth = tiger_truth(spec);
    let pomdp = skeleton.pomdp(&truth).expect("tiger has observations");
    (skeleton, pomdp)
}

/// The true error rates as a hypothesis of the skeleton.
pub fn tiger_truth(spec: &TigerSpec) -> Hypothesis {
    let scalars = if spec.shared_rate {
        vec![spec.true_error_rates.0]
    } else {
        vec![spec.true_error_rates.0, spec.true_error_rates.1]
    };
    Hypothesis { scalars, rows: Vec::new() }
}

/// Independent Beta priors on the unknown error rates.
pub fn tiger_prior(spec: &TigerSpec) -> Prior {
    let (alpha, beta) = spec.prior;
    let n = if spec.shared_rate { 1 } else { 2 };
    Prior::new(vec![ScalarPrior::Beta { alpha, beta }; n], Vec::new()).expect("positive Beta parameters")
}
