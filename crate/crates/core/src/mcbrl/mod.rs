//! Monte Carlo Bayesian RL: priors, hypothesis sampling, the discrete
//! Bayes-adaptive MOMDP built from `K` hypotheses, and the online loop.

mod agent;
mod build;
mod online;
mod prior;
mod skeleton;

use thiserror::Error;

use crate::model::Violation;

pub use agent::AlphaAgent;
pub use build::{build_bamdp, build_bapomdp, expected_mdp, AdaptiveModel, HiddenLayout};
pub use online::{run_online, Agent, Budget, Environment, Step, Trace};
pub use prior::{sample_dirichlet, sample_hypotheses, HypothesisSampler, HypothesisSet, Prior, ScalarPrior};
pub use skeleton::{AffineEntry, Hypothesis, RowKind, RowSpec, StartState, TaskSkeleton};

#[derive(Debug, Error)]
pub enum McbrlError {
    #[error("malformed skeleton: {0}")]
    Skeleton(String),
    #[error("invalid prior: {0}")]
    Prior(String),
    #[error("skeleton and hypotheses disagree: {0}")]
    Mismatch(String),
    #[error("hypothesis {index} does not complete to a valid model: {message}")]
    InvalidHypothesis { index: usize, message: String },
    #[error("built model is invalid: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Invalid(Vec<Violation>),
}
