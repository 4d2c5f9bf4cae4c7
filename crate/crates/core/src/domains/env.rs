//! Simulators that hold the true parameters of a task.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mcbrl::{Environment, Step};
use crate::model::{DiscreteMdp, DiscretePomdp};

/// Draws an index from a probability row.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Round-off: fall back to the last index with mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Fully observable simulator; the observation is the next state.
#[derive(Debug, Clone)]
pub struct MdpEnvironment {
    mdp: DiscreteMdp,
    state: usize,
    rng: ChaCha8Rng,
}

impl MdpEnvironment {
    pub fn new(mdp: DiscreteMdp, start: usize, seed: u64) -> Self {
        Self {
            mdp,
            state: start,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn mdp(&self) -> &DiscreteMdp {
        &self.mdp
    }
}

impl Environment for MdpEnvironment {
    fn num_actions(&self) -> usize {
        self.mdp.num_actions
    }

    fn num_observations(&self) -> usize {
        self.mdp.num_states
    }

    fn state(&self) -> usize {
        self.state
    }

    fn step(&mut self, action: usize) -> Step {
        let s = self.state;
        let s2 = sample_index(self.mdp.row(s, action), &mut self.rng);
        self.state = s2;
        Step {
            state: s2,
            observation: s2,
            reward: self.mdp.r(s, action, s2),
            episode_end: false,
        }
    }
}

/// Partially observable simulator. Actions flagged in `ends_episode` close an
/// episode for bookkeeping; the dynamics themselves continue.
#[derive(Debug, Clone)]
pub struct PomdpEnvironment {
    pomdp: DiscretePomdp,
    ends_episode: Vec<bool>,
    state: usize,
    rng: ChaCha8Rng,
}

impl PomdpEnvironment {
    pub fn new(pomdp: DiscretePomdp, ends_episode: Vec<bool>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = sample_index(&pomdp.initial_belief, &mut rng);
        Self {
            pomdp,
            ends_episode,
            state,
            rng,
        }
    }
}

impl Environment for PomdpEnvironment {
    fn num_actions(&self) -> usize {
        self.pomdp.num_actions()
    }

    fn num_observations(&self) -> usize {
        self.pomdp.num_observations
    }

    fn state(&self) -> usize {
        self.state
    }

    fn step(&mut self, action: usize) -> Step {
        let s = self.state;
        let s2 = sample_index(self.pomdp.mdp.row(s, action), &mut self.rng);
        let o = sample_index(self.pomdp.observation_row(s2, action), &mut self.rng);
        self.state = s2;
        Step {
            state: s2,
            observation: o,
            reward: self.pomdp.mdp.r(s, action, s2),
            episode_end: self.ends_episode.get(action).copied().unwrap_or(false),
        }
    }
}
