//! The five-state Chain with slipping actions.
//!
//! Action `a` moves one state forward (the last state loops), action `b`
//! returns to the first state. With the action's slip probability the other
//! action's effect happens instead. Reward follows the realized effect: the
//! return pays 2, moving forward in the last state pays 10.

use serde::{Deserialize, Serialize};

use crate::mcbrl::{AffineEntry, Hypothesis, Prior, RowSpec, ScalarPrior, StartState, TaskSkeleton};
use crate::model::DiscreteMdp;

pub const NUM_STATES: usize = 5;
pub const ACTION_A: usize = 0;
pub const ACTION_B: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainVariant {
    /// One unknown slip probability per action, shared by all states.
    SemiTied,
    /// Every transition row unknown.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub variant: ChainVariant,
    /// True slip probabilities of `a` and `b`.
    pub true_slip: (f64, f64),
    pub discount: f64,
    pub reset_reward: f64,
    pub goal_reward: f64,
}

impl ChainSpec {
    pub fn new(variant: ChainVariant) -> Self {
        Self {
            variant,
            true_slip: (0.2, 0.2),
            discount: 0.95,
            reset_reward: 2.0,
            goal_reward: 10.0,
        }
    }
}

fn forward(s: usize) -> usize {
    (s + 1).min(NUM_STATES - 1)
}

fn reward_tensor(spec: &ChainSpec) -> Vec<f64> {
    let (ns, na) = (NUM_STATES, 2);
    let mut r = vec![0.0; ns * na * ns];
    for s in 0..ns {
        for a in 0..na {
            r[(s * na + a) * ns] = spec.reset_reward;
            if s == ns - 1 {
                r[(s * na + a) * ns + s] = spec.goal_reward;
            }
        }
    }
    r
}

fn semi_tied_rows() -> Vec<RowSpec> {
    let mut rows = Vec::new();
    for s in 0..NUM_STATES {
        rows.push(RowSpec::Parametric(vec![AffineEntry::complement(forward(s), 0), AffineEntry::param(0, 0)]));
        rows.push(RowSpec::Parametric(vec![AffineEntry::complement(0, 1), AffineEntry::param(forward(s), 1)]));
    }
    rows
}

/// Agent skeleton and the true MDP.
pub fn build_chain(spec: &ChainSpec) -> (TaskSkeleton, DiscreteMdp) {
    let mut skeleton = TaskSkeleton {
        num_states: NUM_STATES,
        num_actions: 2,
        num_observations: None,
        discount: spec.discount,
        reward: reward_tensor(spec),
        transition: semi_tied_rows(),
        observation: None,
        parameters: vec!["slip_a".into(), "slip_b".into()],
        start: StartState::Known(0),
    };
    let semi = skeleton.hypothesis_from_scalars(vec![spec.true_slip.0, spec.true_slip.1]);
    let mdp = skeleton.mdp(&semi);
    if spec.variant == ChainVariant::Full {
        skeleton.transition = vec![RowSpec::Unknown; NUM_STATES * 2];
        skeleton.parameters.clear();
    }
    (skeleton, mdp)
}

/// The true parameters as a hypothesis of the variant's skeleton.
pub fn chain_truth(spec: &ChainSpec, skeleton: &TaskSkeleton, truth: &DiscreteMdp) -> Hypothesis {
    match spec.variant {
        ChainVariant::SemiTied => skeleton.hypothesis_from_scalars(vec![spec.true_slip.0, spec.true_slip.1]),
        ChainVariant::Full => skeleton.hypothesis_from_model(&truth.transition, None, Vec::new()),
    }
}

/// Uniform slip priors, or a flat Dirichlet on every row.
pub fn chain_prior(spec: &ChainSpec, skeleton: &TaskSkeleton) -> Prior {
    match spec.variant {
        ChainVariant::SemiTied => Prior::new(vec![ScalarPrior::Uniform { lo: 0.0, hi: 1.0 }; 2], Vec::new()),
        ChainVariant::Full => Prior::with_flat_rows(skeleton, Vec::new()),
    }
    .expect("well-formed chain prior")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mdp_value_iteration;

    #[test]
    fn slip_sends_the_other_effect() {
        let (_, mdp) = build_chain(&ChainSpec::new(ChainVariant::SemiTied));
        // States are 0-based: state 1 of the chain is index 0.
        assert!((mdp.t(0, ACTION_A, 1) - 0.8).abs() < 1e-12);
        assert!((mdp.t(0, ACTION_A, 0) - 0.2).abs() < 1e-12);
        assert!((mdp.t(4, ACTION_A, 4) - 0.8).abs() < 1e-12);
        assert!((mdp.t(3, ACTION_B, 0) - 0.8).abs() < 1e-12);
        assert_eq!(mdp.r(4, ACTION_A, 4), 10.0);
        assert_eq!(mdp.r(2, ACTION_B, 0), 2.0);
    }

    #[test]
    fn optimal_policy_always_advances() {
        for slip in [0.0, 0.2] {
            let mut spec = ChainSpec::new(ChainVariant::SemiTied);
            spec.true_slip = (slip, slip);
            let (_, mdp) = build_chain(&spec);
            assert_eq!(mdp_value_iteration(&mdp, 1e-9).policy, vec![ACTION_A; NUM_STATES]);
        }
    }

    #[test]
    fn full_variant_has_forty_free_parameters() {
        let (skeleton, _) = build_chain(&ChainSpec::new(ChainVariant::Full));
        assert_eq!(skeleton.num_free_parameters(), 40);
        let (semi, _) = build_chain(&ChainSpec::new(ChainVariant::SemiTied));
        assert_eq!(semi.num_free_parameters(), 2);
    }
}
