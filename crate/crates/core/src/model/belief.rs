//! Probability vectors over (hidden) states and the errors the filters raise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the total mass of a belief.
pub const BELIEF_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeliefError {
    /// Every state consistent with the belief assigns zero likelihood to the evidence.
    #[error("impossible evidence: action {action}, observation {observation} has zero likelihood under the current belief")]
    ImpossibleEvidence { action: usize, observation: usize },
    #[error("belief is not normalized (sum = {0})")]
    NotNormalized(f64),
    #[error("belief entry {index} = {value} is not a probability")]
    InvalidEntry { index: usize, value: f64 },
    #[error("belief has {got} entries, expected {want}")]
    Dimension { got: usize, want: usize },
}

/// Normalized probability vector over the hidden component of a MOMDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HiddenBelief(Vec<f64>);

impl HiddenBelief {
    pub fn new(probs: Vec<f64>) -> Result<Self, BeliefError> {
        check_distribution(&probs)?;
        Ok(Self(probs))
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, index: usize) -> Self {
        let mut v = vec![0.0; n];
        v[index] = 1.0;
        Self(v)
    }

    /// Normalizes a nonnegative weight vector; fails if all weights are zero.
    pub fn from_weights(mut weights: Vec<f64>) -> Option<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Some(Self(weights))
    }

    pub(crate) fn from_normalized_unchecked(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        entropy(&self.0)
    }
}

impl AsRef<[f64]> for HiddenBelief {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for HiddenBelief {
    type Error = BeliefError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<HiddenBelief> for Vec<f64> {
    fn from(b: HiddenBelief) -> Self {
        b.0
    }
}

pub(crate) fn check_distribution(probs: &[f64]) -> Result<(), BeliefError> {
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(BeliefError::InvalidEntry { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > BELIEF_TOLERANCE {
        return Err(BeliefError::NotNormalized(sum));
    }
    Ok(())
}

pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized() {
        assert!(matches!(
            HiddenBelief::new(vec![0.5, 0.4]),
            Err(BeliefError::NotNormalized(_))
        ));
        assert!(HiddenBelief::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn weights_normalize() {
        let b = HiddenBelief::from_weights(vec![1.0, 3.0]).unwrap();
        assert_eq!(b.as_slice(), &[0.25, 0.75]);
        assert!(HiddenBelief::from_weights(vec![0.0, 0.0]).is_none());
    }

    #[test]
    fn entropy_of_uniform() {
        let b = HiddenBelief::uniform(4);
        assert!((b.entropy() - 4f64.ln()).abs() < 1e-12);
        assert_eq!(HiddenBelief::point(3, 1).entropy(), 0.0);
    }
}
