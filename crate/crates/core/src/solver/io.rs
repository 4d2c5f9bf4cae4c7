//! Alpha-vector policy files.
//!
//! A policy file is a JSON object
//! `{"observed": |X|, "hidden": |Y|, "initial_observed": x₀, "initial_belief": [...],
//!   "alphas": [{"observed_state": x, "action": a, "values": [...]}, ...]}`.
//! Loading one rebuilds the lower bound exactly, so it can be executed
//! without re-solving.

use serde::{Deserialize, Serialize};

use super::bounds::{AlphaVector, LowerBound};
use super::hsvi::SolveResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub observed: usize,
    pub hidden: usize,
    pub initial_observed: usize,
    pub initial_belief: Vec<f64>,
    pub lower_value: f64,
    pub upper_value: f64,
    pub alphas: Vec<AlphaVector>,
}

impl PolicyFile {
    pub fn from_result(result: &SolveResult) -> Self {
        Self {
            observed: result.lower.num_observed(),
            hidden: result.lower.num_hidden,
            initial_observed: result.initial_observed,
            initial_belief: result.initial_belief.clone(),
            lower_value: result.lower_value,
            upper_value: result.upper_value,
            alphas: result.lower.iter().cloned().collect(),
        }
    }

    /// Rebuilds the lower bound, preserving vector order.
    pub fn lower_bound(&self) -> Result<LowerBound, String> {
        let mut lb = LowerBound::new(self.observed, self.hidden);
        for (i, a) in self.alphas.iter().enumerate() {
            if a.observed_state >= self.observed || a.values.len() != self.hidden {
                return Err(format!("alpha {i} does not fit {} observed and {} hidden values", self.observed, self.hidden));
            }
            if a.values.iter().any(|v| !v.is_finite()) {
                return Err(format!("alpha {i} has a non-finite entry"));
            }
            lb.insert(a.clone());
        }
        Ok(lb)
    }
}

pub fn write_policy(result: &SolveResult) -> String {
    serde_json::to_string_pretty(&PolicyFile::from_result(result)).expect("policy serializes")
}

pub fn read_policy(text: &str) -> Result<PolicyFile, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}
