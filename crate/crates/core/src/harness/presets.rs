//! Ready-made experiment sets for the three result tables.

use serde::{Deserialize, Serialize};

use super::config::{AlgorithmKey, ExperimentConfig};
use super::run::{run_experiment, ResultTable};
use super::HarnessError;
use crate::domains::DomainKey;
use crate::mcbrl::Budget;
use crate::solver::SolveConfig;

/// `Desk` keeps runs to minutes on one machine; `Full` uses the original counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Desk,
    Full,
}

pub const CHAIN_STEPS: usize = 1000;
pub const TIGER_EPISODES: usize = 100;
/// Step cap for a Tiger run in case a policy never opens a door.
pub const TIGER_MAX_STEPS: usize = 10_000;
pub const IPD_PLAYS: usize = 20;
pub const IPD_STEPS: usize = 300;

fn gap_solver(gap: f64, max_backups: usize) -> SolveConfig {
    SolveConfig {
        target_gap: Some(gap),
        max_backups: Some(max_backups),
        ..SolveConfig::default()
    }
}

fn config(
    domain: DomainKey,
    algorithm: AlgorithmKey,
    k: usize,
    sims: usize,
    budget: Budget,
    seed: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        k,
        seed,
        ..ExperimentConfig::new(domain, algorithm, sims, budget)
    }
}

/// Chain: MC-BRL on both variants, MC-BRL⁺, Q-learning, exploit and the
/// true-model bound.
pub fn table1(scale: Scale, seed: u64) -> Vec<ExperimentConfig> {
    let sims = match scale {
        Scale::Desk => 100,
        Scale::Full => 500,
    };
    let steps = Budget::Steps(CHAIN_STEPS);
    let semi = DomainKey::ChainSemitied;
    let full = DomainKey::ChainFull;
    let mut mcbrl = config(semi, AlgorithmKey::McBrl, 100, sims, steps, seed);
    mcbrl.solver = gap_solver(5.0, 20_000);
    let mut mcbrl_full = config(full, AlgorithmKey::McBrl, 1000, sims, steps, seed);
    mcbrl_full.solver = gap_solver(5.0, 300);
    let mut plus = config(full, AlgorithmKey::McBrlPlus, 10, sims, steps, seed);
    plus.solver = gap_solver(5.0, 20_000);
    vec![
        mcbrl,
        mcbrl_full,
        plus,
        config(semi, AlgorithmKey::QLearning, 1, sims, steps, seed),
        config(semi, AlgorithmKey::Exploit, 100, sims, steps, seed),
        config(semi, AlgorithmKey::UpperBound, 1, sims, steps, seed),
    ]
}

/// Tiger: MC-BRL, the prior-mean model and the true-model bound.
pub fn table2(scale: Scale, seed: u64) -> Vec<ExperimentConfig> {
    let sims = match scale {
        Scale::Desk => 200,
        Scale::Full => 1000,
    };
    let budget = Budget::Episodes {
        count: TIGER_EPISODES,
        max_steps: TIGER_MAX_STEPS,
    };
    let tiger = DomainKey::Tiger;
    let mut mcbrl = config(tiger, AlgorithmKey::McBrl, 100, sims, budget, seed);
    mcbrl.solver = gap_solver(0.1, 200);
    let mut known = [AlgorithmKey::PriorModel, AlgorithmKey::UpperBound]
        .map(|a| config(tiger, a, 1, sims, budget, seed))
        .to_vec();
    for c in &mut known {
        c.solver = gap_solver(0.01, 20_000);
    }
    let mut out = vec![mcbrl];
    out.extend(known);
    out
}

/// IPD: one sampled opponent per simulation, several plays against it.
pub fn table3(scale: Scale, seed: u64) -> Vec<ExperimentConfig> {
    let sims = match scale {
        Scale::Desk => 100,
        Scale::Full => 1000,
    };
    let budget = Budget::Steps(IPD_STEPS);
    let ipd = DomainKey::Ipd;
    let mut out: Vec<ExperimentConfig> = [
        (AlgorithmKey::McBrl, 250),
        (AlgorithmKey::QLearning, 1),
        (AlgorithmKey::Tft, 1),
        (AlgorithmKey::Pavlov, 1),
        (AlgorithmKey::UpperBound, 1),
    ]
    .into_iter()
    .map(|(a, k)| ExperimentConfig {
        plays: IPD_PLAYS,
        ..config(ipd, a, k, sims, budget, seed)
    })
    .collect();
    out[0].solver = gap_solver(5.0, 20_000);
    out
}

/// Runs each config and collects one row per config.
pub fn run_table(configs: &[ExperimentConfig]) -> Result<ResultTable, HarnessError> {
    let mut rows = Vec::with_capacity(configs.len());
    for c in configs {
        rows.extend(run_experiment(c)?.rows);
    }
    Ok(ResultTable { rows })
}
