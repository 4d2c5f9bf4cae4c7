//! Experiment configuration, loadable from TOML.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::domains::DomainKey;
use crate::mcbrl::{Budget, Prior};
use crate::solver::SolveConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKey {
    McBrl,
    /// MC-BRL with the true parameters swapped in as one hypothesis.
    McBrlPlus,
    QLearning,
    Exploit,
    Tft,
    Pavlov,
    PriorModel,
    UpperBound,
}

impl AlgorithmKey {
    pub const ALL: [AlgorithmKey; 8] = [
        AlgorithmKey::McBrl,
        AlgorithmKey::McBrlPlus,
        AlgorithmKey::QLearning,
        AlgorithmKey::Exploit,
        AlgorithmKey::Tft,
        AlgorithmKey::Pavlov,
        AlgorithmKey::PriorModel,
        AlgorithmKey::UpperBound,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmKey::McBrl => "mc-brl",
            AlgorithmKey::McBrlPlus => "mc-brl-plus",
            AlgorithmKey::QLearning => "q-learning",
            AlgorithmKey::Exploit => "exploit",
            AlgorithmKey::Tft => "tft",
            AlgorithmKey::Pavlov => "pavlov",
            AlgorithmKey::PriorModel => "prior-model",
            AlgorithmKey::UpperBound => "upper-bound",
        }
    }

    /// Whether the algorithm samples hypotheses, so `k` matters.
    pub fn uses_hypotheses(&self) -> bool {
        matches!(self, AlgorithmKey::McBrl | AlgorithmKey::McBrlPlus | AlgorithmKey::Exploit)
    }
}

impl fmt::Display for AlgorithmKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|k| k.as_str()).collect();
            format!("unknown algorithm `{s}` (expected one of {})", names.join(", "))
        })
    }
}

fn default_k() -> usize {
    100
}

fn default_plays() -> usize {
    1
}

/// `{0, 0.05, …, 0.5}`.
pub fn default_epsilon_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 * 0.05).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainKey,
    pub algorithm: AlgorithmKey,
    /// Number of sampled hypotheses.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Replaces the domain's default prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Prior>,
    #[serde(default)]
    pub solver: SolveConfig,
    pub simulations: usize,
    /// Length of each play.
    pub budget: Budget,
    /// Independent plays per simulation sharing one offline solve; the
    /// simulation's total is their mean.
    #[serde(default = "default_plays")]
    pub plays: usize,
    #[serde(default)]
    pub seed: u64,
    /// Exploration rates swept by Q-learning; the best mean is reported.
    #[serde(default = "default_epsilon_grid")]
    pub epsilon_grid: Vec<f64>,
    /// Output stem; results go to `<out>.csv` and `<out>.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(domain: DomainKey, algorithm: AlgorithmKey, simulations: usize, budget: Budget) -> Self {
        Self {
            domain,
            algorithm,
            k: default_k(),
            prior: None,
            solver: SolveConfig::default(),
            simulations,
            budget,
            plays: default_plays(),
            seed: 0,
            epsilon_grid: default_epsilon_grid(),
            out: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |m: String| Err(HarnessError::Config(m));
        if self.simulations == 0 {
            return err("simulations must be at least 1".into());
        }
        if self.k == 0 {
            return err("k must be at least 1".into());
        }
        if self.plays == 0 {
            return err("plays must be at least 1".into());
        }
        match self.budget {
            Budget::Steps(0) => return err("steps must be at least 1".into()),
            Budget::Episodes { count, max_steps } if count == 0 || max_steps == 0 => {
                return err("episode count and step cap must be at least 1".into())
            }
            Budget::Episodes { .. } if !self.domain.is_episodic() => {
                return err(format!("domain {} has no episodes; use a step budget", self.domain))
            }
            _ => {}
        }
        if !self.solver.has_stopping_criterion() {
            return err("solver needs a target gap, backup limit or time budget".into());
        }
        match (self.algorithm, self.domain) {
            (AlgorithmKey::Tft | AlgorithmKey::Pavlov, d) if d != DomainKey::Ipd => {
                return err(format!("{} only plays {}", self.algorithm, DomainKey::Ipd))
            }
            (AlgorithmKey::QLearning | AlgorithmKey::Exploit, DomainKey::Tiger) => {
                return err(format!("{} needs a fully observable domain", self.algorithm))
            }
            _ => {}
        }
        if self.algorithm == AlgorithmKey::QLearning
            && (self.epsilon_grid.is_empty() || self.epsilon_grid.iter().any(|e| !(0.0..=1.0).contains(e)))
        {
            return err("epsilon grid must be nonempty with values in [0, 1]".into());
        }
        Ok(())
    }
}
