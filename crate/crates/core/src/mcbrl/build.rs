//! Compiling a hypothesis set into the discrete Bayes-adaptive MOMDP.

use serde::{Deserialize, Serialize};

use super::prior::{check_complete, HypothesisSet};
use super::skeleton::TaskSkeleton;
use super::McbrlError;
use crate::model::{DiscreteMdp, HiddenBelief, HiddenKernel, MomdpModel, MomdpParts, RewardKernel};

/// How the hidden index of an [`AdaptiveModel`] decomposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenLayout {
    /// `y = k`; the world state is the observed component.
    Hypothesis,
    /// `y = k·|S| + s`; the world state is hidden and `x` is a single dummy value.
    StateHypothesis { num_states: usize },
}

/// A Bayes-adaptive MOMDP together with the map from task observations to
/// its observed component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveModel {
    pub model: MomdpModel,
    pub layout: HiddenLayout,
    pub num_hypotheses: usize,
    /// Observed component entered when the task emits observation `o`.
    pub observed_of_observation: Vec<usize>,
}

impl AdaptiveModel {
    /// Posterior over hypotheses from a hidden belief.
    pub fn hypothesis_marginal(&self, belief: &[f64]) -> Vec<f64> {
        match self.layout {
            HiddenLayout::Hypothesis => belief.to_vec(),
            HiddenLayout::StateHypothesis { num_states } => {
                belief.chunks(num_states).map(|c| c.iter().sum()).collect()
            }
        }
    }

    /// Observed component after the task emits `o`.
    pub fn next_observed(&self, o: usize) -> usize {
        self.observed_of_observation[o]
    }
}

fn check_set(skeleton: &TaskSkeleton, hyps: &HypothesisSet) -> Result<(), McbrlError> {
    if hyps.is_empty() {
        return Err(McbrlError::Mismatch("empty hypothesis set".into()));
    }
    skeleton.check_shapes()?;
    for (i, h) in hyps.iter().enumerate() {
        skeleton.check_hypothesis(h)?;
        check_complete(skeleton, h).map_err(|m| McbrlError::InvalidHypothesis { index: i, message: m })?;
    }
    Ok(())
}

/// Fully observable task: `X = S`, `Y = {0..K}`, the observation is the next
/// state and hypotheses never mix.
pub fn build_bamdp(skeleton: &TaskSkeleton, hyps: &HypothesisSet) -> Result<AdaptiveModel, McbrlError> {
    if skeleton.has_unknown_observations() {
        return Err(McbrlError::Mismatch("build_bamdp needs a fully observable skeleton".into()));
    }
    check_set(skeleton, hyps)?;
    let start = skeleton
        .start
        .known()
        .ok_or_else(|| McbrlError::Skeleton("a fully observable task needs a known start state".into()))?;
    let (ns, na, k) = (skeleton.num_states, skeleton.num_actions, hyps.len());
    let tensors: Vec<Vec<f64>> = hyps.iter().map(|h| skeleton.complete_transition(h)).collect();

    let mut transition = Vec::with_capacity(ns * na * ns);
    let mut reward = Vec::with_capacity(ns * na * ns);
    for s in 0..ns {
        for a in 0..na {
            for s2 in 0..ns {
                let i = (s * na + a) * ns + s2;
                transition.push(HiddenKernel::diagonal(tensors.iter().map(|t| t[i]).collect()));
                reward.push(RewardKernel::Constant(skeleton.reward[i]));
            }
        }
    }
    let mut observation = vec![0.0; ns * k * na * ns];
    for s2 in 0..ns {
        for y in 0..k {
            for a in 0..na {
                observation[((s2 * k + y) * na + a) * ns + s2] = 1.0;
            }
        }
    }
    let model = MomdpModel::new(MomdpParts {
        num_observed: ns,
        num_hidden: k,
        num_actions: na,
        num_observations: ns,
        discount: skeleton.discount,
        transition,
        observation,
        reward,
        initial_observed: start,
        initial_hidden_belief: vec![1.0 / k as f64; k],
    })
    .map_err(McbrlError::Invalid)?;
    Ok(AdaptiveModel {
        model,
        layout: HiddenLayout::Hypothesis,
        num_hypotheses: k,
        observed_of_observation: (0..ns).collect(),
    })
}

/// Maps each observation to the unique state able to emit it, if the
/// observation always reveals the state under every hypothesis.
fn revealing_map(skeleton: &TaskSkeleton, observations: &[Vec<f64>]) -> Option<Vec<usize>> {
    let (ns, na) = (skeleton.num_states, skeleton.num_actions);
    let no = skeleton.num_observations?;
    let mut owner: Vec<Option<usize>> = vec![None; no];
    for z in observations {
        for s2 in 0..ns {
            for a in 0..na {
                for o in 0..no {
                    if z[(s2 * na + a) * no + o] > 0.0 {
                        match owner[o] {
                            Some(s) if s != s2 => return None,
                            _ => owner[o] = Some(s2),
                        }
                    }
                }
            }
        }
    }
    Some(owner.into_iter().map(|s| s.unwrap_or(0)).collect())
}

/// Partially observable task: observation parameters may be unknown too.
///
/// When every observation identifies the next world state under every
/// hypothesis and the start state is known, the world state stays observed
/// (`X = S`, `Y = K`). Otherwise `X` is a single value and the hidden index
/// packs the pair as `y = k·|S| + s`.
pub fn build_bapomdp(skeleton: &TaskSkeleton, hyps: &HypothesisSet) -> Result<AdaptiveModel, McbrlError> {
    let no = skeleton
        .num_observations
        .ok_or_else(|| McbrlError::Mismatch("build_bapomdp needs observations in the skeleton".into()))?;
    if skeleton.observation.is_none() {
        return Err(McbrlError::Mismatch("build_bapomdp needs observation rows in the skeleton".into()));
    }
    check_set(skeleton, hyps)?;
    let (ns, na, k) = (skeleton.num_states, skeleton.num_actions, hyps.len());
    let ts: Vec<Vec<f64>> = hyps.iter().map(|h| skeleton.complete_transition(h)).collect();
    let zs: Vec<Vec<f64>> = hyps
        .iter()
        .map(|h| skeleton.complete_observation(h).expect("observation rows present"))
        .collect();
    let start = skeleton.start.distribution(ns);

    if let (Some(owner), Some(s0)) = (revealing_map(skeleton, &zs), skeleton.start.known()) {
        let mut transition = Vec::with_capacity(ns * na * ns);
        let mut reward = Vec::with_capacity(ns * na * ns);
        for s in 0..ns {
            for a in 0..na {
                for s2 in 0..ns {
                    let i = (s * na + a) * ns + s2;
                    transition.push(HiddenKernel::diagonal(ts.iter().map(|t| t[i]).collect()));
                    reward.push(RewardKernel::Constant(skeleton.reward[i]));
                }
            }
        }
        let mut observation = vec![0.0; ns * k * na * no];
        for s2 in 0..ns {
            for (y, z) in zs.iter().enumerate() {
                for a in 0..na {
                    let dst = ((s2 * k + y) * na + a) * no;
                    observation[dst..dst + no].copy_from_slice(&z[(s2 * na + a) * no..(s2 * na + a + 1) * no]);
                }
            }
        }
        let model = MomdpModel::new(MomdpParts {
            num_observed: ns,
            num_hidden: k,
            num_actions: na,
            num_observations: no,
            discount: skeleton.discount,
            transition,
            observation,
            reward,
            initial_observed: s0,
            initial_hidden_belief: vec![1.0 / k as f64; k],
        })
        .map_err(McbrlError::Invalid)?;
        return Ok(AdaptiveModel {
            model,
            layout: HiddenLayout::Hypothesis,
            num_hypotheses: k,
            observed_of_observation: owner,
        });
    }

    let ny = k * ns;
    let mut transition = Vec::with_capacity(na);
    let mut reward = Vec::with_capacity(na);
    for a in 0..na {
        let mut data = vec![0.0; k * ns * ns];
        for (kk, t) in ts.iter().enumerate() {
            for s in 0..ns {
                for s2 in 0..ns {
                    data[kk * ns * ns + s * ns + s2] = t[(s * na + a) * ns + s2];
                }
            }
        }
        transition.push(HiddenKernel::BlockDiagonal { size: ns, data });
        let values = (0..ns * ns)
            .map(|i| skeleton.reward[((i / ns) * na + a) * ns + i % ns])
            .collect();
        reward.push(RewardKernel::Tiled { period: ns, values });
    }
    let mut observation = vec![0.0; ny * na * no];
    for (kk, z) in zs.iter().enumerate() {
        for s2 in 0..ns {
            for a in 0..na {
                let dst = ((kk * ns + s2) * na + a) * no;
                observation[dst..dst + no].copy_from_slice(&z[(s2 * na + a) * no..(s2 * na + a + 1) * no]);
            }
        }
    }
    let initial_hidden_belief = (0..ny).map(|y| start[y % ns] / k as f64).collect();
    let model = MomdpModel::new(MomdpParts {
        num_observed: 1,
        num_hidden: ny,
        num_actions: na,
        num_observations: no,
        discount: skeleton.discount,
        transition,
        observation,
        reward,
        initial_observed: 0,
        initial_hidden_belief,
    })
    .map_err(McbrlError::Invalid)?;
    Ok(AdaptiveModel {
        model,
        layout: HiddenLayout::StateHypothesis { num_states: ns },
        num_hypotheses: k,
        observed_of_observation: vec![0; no],
    })
}

/// Posterior-mean MDP: `T̄ = Σ_k b(k) T_k`, rewards and discount from the skeleton.
pub fn expected_mdp(skeleton: &TaskSkeleton, hyps: &HypothesisSet, belief: &HiddenBelief) -> Result<DiscreteMdp, McbrlError> {
    if belief.len() != hyps.len() {
        return Err(McbrlError::Mismatch(format!(
            "belief over {} hypotheses, set has {}",
            belief.len(),
            hyps.len()
        )));
    }
    let (ns, na) = (skeleton.num_states, skeleton.num_actions);
    let mut transition = vec![0.0; ns * na * ns];
    for (h, &w) in hyps.iter().zip(belief.as_slice()) {
        if w == 0.0 {
            continue;
        }
        for (t, v) in transition.iter_mut().zip(skeleton.complete_transition(h)) {
            *t += w * v;
        }
    }
    Ok(DiscreteMdp {
        num_states: ns,
        num_actions: na,
        transition,
        reward: skeleton.reward.clone(),
        discount: skeleton.discount,
    })
}
