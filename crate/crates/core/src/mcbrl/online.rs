//! The online phase: an agent acting in a simulated environment.

use serde::{Deserialize, Serialize};

use crate::model::BeliefError;

/// Outcome of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: usize,
    pub observation: usize,
    pub reward: f64,
    /// The step closed an episode.
    pub episode_end: bool,
}

/// A simulator holding the true parameters and its own RNG stream.
pub trait Environment {
    fn num_actions(&self) -> usize;
    fn num_observations(&self) -> usize;
    fn state(&self) -> usize;
    fn step(&mut self, action: usize) -> Step;
}

/// A decision maker driven by the observations it receives.
pub trait Agent {
    fn act(&mut self) -> usize;
    fn observe(&mut self, action: usize, observation: usize, reward: f64) -> Result<(), BeliefError>;
    /// Current hidden belief, for agents that track one.
    fn hidden_belief(&self) -> Option<&[f64]> {
        None
    }
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn act(&mut self) -> usize {
        (**self).act()
    }
    fn observe(&mut self, action: usize, observation: usize, reward: f64) -> Result<(), BeliefError> {
        (**self).observe(action, observation, reward)
    }
    fn hidden_belief(&self) -> Option<&[f64]> {
        (**self).hidden_belief()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Steps(usize),
    /// Run until `count` episodes end; `max_steps` caps the total in case an
    /// agent never ends an episode.
    Episodes { count: usize, max_steps: usize },
}

/// Everything that happened during one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    /// Environment states, starting with the initial one.
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub observations: Vec<usize>,
    pub rewards: Vec<f64>,
    /// Agent hidden belief before each action, when recorded.
    pub beliefs: Vec<Vec<f64>>,
    /// Total reward of each completed episode.
    pub episode_rewards: Vec<f64>,
    /// Set when the run stopped early on a belief-filter error.
    pub failure: Option<String>,
}

impl Trace {
    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Runs `agent` in `env` for the given budget. A belief-filter error ends
/// the run and is recorded in [`Trace::failure`].
pub fn run_online<A: Agent + ?Sized, E: Environment + ?Sized>(
    agent: &mut A,
    env: &mut E,
    budget: Budget,
    record_beliefs: bool,
) -> Trace {
    let mut trace = Trace {
        states: vec![env.state()],
        ..Trace::default()
    };
    let (max_steps, episodes) = match budget {
        Budget::Steps(n) => (n, None),
        Budget::Episodes { count, max_steps } => (max_steps, Some(count)),
    };
    let mut episode_total = 0.0;
    for _ in 0..max_steps {
        if episodes.is_some_and(|n| trace.episode_rewards.len() >= n) {
            break;
        }
        if record_beliefs {
            if let Some(b) = agent.hidden_belief() {
                trace.beliefs.push(b.to_vec());
            }
        }
        let a = agent.act();
        let step = env.step(a);
        trace.actions.push(a);
        trace.observations.push(step.observation);
        trace.rewards.push(step.reward);
        trace.states.push(step.state);
        episode_total += step.reward;
        if step.episode_end {
            trace.episode_rewards.push(episode_total);
            episode_total = 0.0;
        }
        if let Err(e) = agent.observe(a, step.observation, step.reward) {
            trace.failure = Some(e.to_string());
            break;
        }
    }
    trace
}
