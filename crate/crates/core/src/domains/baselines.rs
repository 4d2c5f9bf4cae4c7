//! Baseline agents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mcbrl::{build_bamdp, Agent, HypothesisSet, McbrlError, TaskSkeleton};
use crate::model::{belief_update_momdp, mdp_value_iteration_from, BeliefError, DiscreteMdp, HiddenBelief, MomdpModel};

/// Acts by a fixed table over the observed state; the observation is the
/// next state. Covers tit-for-tat, Pavlov and true-model greedy policies.
#[derive(Debug, Clone)]
pub struct StatePolicyAgent {
    policy: Vec<usize>,
    state: usize,
}

impl StatePolicyAgent {
    pub fn new(policy: Vec<usize>, start: usize) -> Self {
        Self { policy, state: start }
    }
}

impl Agent for StatePolicyAgent {
    fn act(&mut self) -> usize {
        self.policy[self.state]
    }

    fn observe(&mut self, _action: usize, observation: usize, _reward: f64) -> Result<(), BeliefError> {
        self.state = observation;
        Ok(())
    }
}

/// Tabular ε-greedy Q-learning with learning rate `1 / n(s, a)`.
#[derive(Debug, Clone)]
pub struct QLearningAgent {
    q: Vec<f64>,
    visits: Vec<u32>,
    num_actions: usize,
    epsilon: f64,
    discount: f64,
    state: usize,
    rng: ChaCha8Rng,
}

impl QLearningAgent {
    pub fn new(num_states: usize, num_actions: usize, start: usize, epsilon: f64, discount: f64, seed: u64) -> Self {
        Self {
            q: vec![0.0; num_states * num_actions],
            visits: vec![0; num_states * num_actions],
            num_actions,
            epsilon,
            discount,
            state: start,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn q_values(&self, s: usize) -> &[f64] {
        &self.q[s * self.num_actions..(s + 1) * self.num_actions]
    }
}

impl Agent for QLearningAgent {
    fn act(&mut self) -> usize {
        if self.rng.random::<f64>() < self.epsilon {
            return self.rng.random_range(0..self.num_actions);
        }
        let q = self.q_values(self.state);
        let best = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..self.num_actions).filter(|&a| q[a] == best).collect();
        ties[self.rng.random_range(0..ties.len())]
    }

    fn observe(&mut self, action: usize, observation: usize, reward: f64) -> Result<(), BeliefError> {
        let i = self.state * self.num_actions + action;
        self.visits[i] += 1;
        let next_best = self.q_values(observation).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let target = reward + self.discount * next_best;
        self.q[i] += (target - self.q[i]) / self.visits[i] as f64;
        self.state = observation;
        Ok(())
    }
}

/// Greedy in the posterior-mean MDP, re-solved after every step.
#[derive(Debug, Clone)]
pub struct ExploitAgent {
    model: MomdpModel,
    transitions: Vec<Vec<f64>>,
    base: DiscreteMdp,
    belief: HiddenBelief,
    state: usize,
    values: Vec<f64>,
    tolerance: f64,
}

impl ExploitAgent {
    pub fn new(skeleton: &TaskSkeleton, hyps: &HypothesisSet) -> Result<Self, McbrlError> {
        let adaptive = build_bamdp(skeleton, hyps)?;
        let base = skeleton.mdp(&hyps.hypotheses[0]);
        Ok(Self {
            state: adaptive.model.initial_observed(),
            belief: adaptive.model.initial_hidden_belief(),
            model: adaptive.model,
            transitions: hyps.iter().map(|h| skeleton.complete_transition(h)).collect(),
            values: vec![0.0; base.num_states],
            base,
            tolerance: 1e-6,
        })
    }

    /// Replaces the posterior, e.g. with a point mass for testing.
    pub fn set_belief(&mut self, belief: HiddenBelief) {
        self.belief = belief;
    }

    pub fn expected_mdp(&self) -> DiscreteMdp {
        let mut mdp = self.base.clone();
        mdp.transition.iter_mut().for_each(|t| *t = 0.0);
        for (t, &w) in self.transitions.iter().zip(self.belief.as_slice()) {
            if w == 0.0 {
                continue;
            }
            for (dst, src) in mdp.transition.iter_mut().zip(t) {
                *dst += w * src;
            }
        }
        mdp
    }
}

impl Agent for ExploitAgent {
    fn act(&mut self) -> usize {
        let mdp = self.expected_mdp();
        let vi = mdp_value_iteration_from(&mdp, self.tolerance, std::mem::take(&mut self.values));
        let a = vi.policy[self.state];
        self.values = vi.values;
        a
    }

    fn observe(&mut self, action: usize, observation: usize, _reward: f64) -> Result<(), BeliefError> {
        self.belief = belief_update_momdp(&self.model, self.state, &self.belief, action, observation, observation)?;
        self.state = observation;
        Ok(())
    }

    fn hidden_belief(&self) -> Option<&[f64]> {
        Some(self.belief.as_slice())
    }
}
