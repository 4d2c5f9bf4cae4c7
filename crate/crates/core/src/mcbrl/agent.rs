//! The MC-BRL online agent: posterior tracking plus the solved alpha policy.

use std::sync::Arc;

use super::build::AdaptiveModel;
use super::online::Agent;
use crate::model::{belief_update_momdp, BeliefError, HiddenBelief};
use crate::solver::LowerBound;

/// Follows an alpha-vector policy while filtering the hidden component.
#[derive(Debug, Clone)]
pub struct AlphaAgent {
    model: Arc<AdaptiveModel>,
    policy: Arc<LowerBound>,
    observed: usize,
    belief: HiddenBelief,
}

impl AlphaAgent {
    pub fn new(model: Arc<AdaptiveModel>, policy: Arc<LowerBound>) -> Self {
        let observed = model.model.initial_observed();
        let belief = model.model.initial_hidden_belief();
        Self {
            model,
            policy,
            observed,
            belief,
        }
    }

    pub fn observed(&self) -> usize {
        self.observed
    }

    pub fn belief(&self) -> &HiddenBelief {
        &self.belief
    }

    /// Posterior over hypotheses.
    pub fn hypothesis_posterior(&self) -> Vec<f64> {
        self.model.hypothesis_marginal(self.belief.as_slice())
    }
}

impl Agent for AlphaAgent {
    fn act(&mut self) -> usize {
        self.policy.best_action(self.observed, self.belief.as_slice())
    }

    fn observe(&mut self, action: usize, observation: usize, _reward: f64) -> Result<(), BeliefError> {
        let next = self.model.next_observed(observation);
        self.belief = belief_update_momdp(&self.model.model, self.observed, &self.belief, action, next, observation)?;
        self.observed = next;
        Ok(())
    }

    fn hidden_belief(&self) -> Option<&[f64]> {
        Some(self.belief.as_slice())
    }
}
