//! Benchmark domains, their simulators and baseline agents.

pub mod baselines;
pub mod chain;
pub mod env;
pub mod ipd;
pub mod tiger;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baselines::{ExploitAgent, QLearningAgent, StatePolicyAgent};
pub use chain::{build_chain, ChainSpec, ChainVariant};
pub use env::{MdpEnvironment, PomdpEnvironment};
pub use ipd::{build_ipd, sample_opponent, IpdOpponent};
pub use tiger::{build_tiger, TigerSpec};

/// Builder keys addressable from experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKey {
    ChainSemitied,
    ChainFull,
    Tiger,
    Ipd,
}

impl DomainKey {
    pub const ALL: [DomainKey; 4] = [DomainKey::ChainSemitied, DomainKey::ChainFull, DomainKey::Tiger, DomainKey::Ipd];

    pub fn as_str(&self) -> &'static str {
        match self {
            DomainKey::ChainSemitied => "chain-semitied",
            DomainKey::ChainFull => "chain-full",
            DomainKey::Tiger => "tiger",
            DomainKey::Ipd => "ipd",
        }
    }

    pub fn is_episodic(&self) -> bool {
        matches!(self, DomainKey::Tiger)
    }
}

impl fmt::Display for DomainKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown domain `{s}` (expected chain-semitied, chain-full, tiger or ipd)"))
    }
}
