//! Simulation batches.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AlgorithmKey, ExperimentConfig};
use super::seed::{child_seed, Phase};
use super::stats::{episode_means, summarize};
use super::HarnessError;
use crate::domains::chain::{build_chain, chain_prior, chain_truth, ChainSpec, ChainVariant};
use crate::domains::ipd::{build_ipd, ipd_prior, ipd_truth, sample_opponent, PAVLOV, START, TIT_FOR_TAT};
use crate::domains::tiger::{build_tiger, episode_ends, tiger_prior, tiger_truth, TigerSpec};
use crate::domains::{DomainKey, ExploitAgent, MdpEnvironment, PomdpEnvironment, QLearningAgent, StatePolicyAgent};
use crate::mcbrl::{
    build_bamdp, build_bapomdp, run_online, sample_hypotheses, AdaptiveModel, Agent, AlphaAgent, Budget, Environment,
    Hypothesis, HypothesisSet, Prior, TaskSkeleton,
};
use crate::model::{mdp_value_iteration, DiscreteMdp, DiscretePomdp};
use crate::solver::{solve, LowerBound, SolveConfig};

/// Environment name for the worker count.
pub const WORKERS_VAR: &str = "MCBRL_WORKERS";

/// Residual for value iteration on known models.
const VI_TOLERANCE: f64 = 1e-9;

/// Outcome of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub index: usize,
    /// Undiscounted total reward, averaged over plays.
    pub total: f64,
    /// Per-episode rewards (episodic domains), averaged over plays.
    pub episode_rewards: Vec<f64>,
    pub failure: Option<String>,
    /// Certified gap of the offline solve, when there was one.
    pub delta: Option<f64>,
    pub solve_seconds: Option<f64>,
    pub backups: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub domain: DomainKey,
    pub algorithm: AlgorithmKey,
    pub mean: f64,
    pub two_se: f64,
    /// Simulations that finished without failure.
    pub n: usize,
    pub failures: usize,
    /// Totals of the successful simulations, in index order.
    pub totals: Vec<f64>,
    pub episode_means: Option<Vec<f64>>,
    /// Q-learning: the exploration rate reported and the mean of every rate tried.
    pub epsilon: Option<f64>,
    pub epsilon_sweep: Vec<(f64, f64)>,
    pub records: Vec<SimulationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn row(&self, algorithm: AlgorithmKey) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }
}

enum Truth {
    Mdp { mdp: DiscreteMdp, start: usize },
    Pomdp { pomdp: DiscretePomdp, ends: Vec<bool> },
}

struct World {
    skeleton: TaskSkeleton,
    prior: Prior,
    truth: Hypothesis,
    env: Truth,
}

fn world(cfg: &ExperimentConfig, index: usize) -> Result<World, HarnessError> {
    let mut w = match cfg.domain {
        DomainKey::ChainSemitied | DomainKey::ChainFull => {
            let variant = if cfg.domain == DomainKey::ChainFull {
                ChainVariant::Full
            } else {
                ChainVariant::SemiTied
            };
            let spec = ChainSpec::new(variant);
            let (skeleton, mdp) = build_chain(&spec);
            World {
                truth: chain_truth(&spec, &skeleton, &mdp),
                prior: chain_prior(&spec, &skeleton),
                skeleton,
                env: Truth::Mdp { mdp, start: 0 },
            }
        }
        DomainKey::Tiger => {
            let spec = TigerSpec::symmetric(0.15);
            let (skeleton, pomdp) = build_tiger(&spec);
            World {
                truth: tiger_truth(&spec),
                prior: tiger_prior(&spec),
                skeleton,
                env: Truth::Pomdp {
                    pomdp,
                    ends: episode_ends(),
                },
            }
        }
        DomainKey::Ipd => {
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(cfg.seed, index, Phase::Opponent, 0));
            let opponent = sample_opponent(&mut rng);
            let (skeleton, mdp) = build_ipd(&opponent);
            World {
                truth: ipd_truth(&opponent),
                prior: ipd_prior(),
                skeleton,
                env: Truth::Mdp { mdp, start: START },
            }
        }
    };
    if let Some(p) = &cfg.prior {
        p.check_against(&w.skeleton)?;
        w.prior = p.clone();
    }
    Ok(w)
}

/// Something that hands out a fresh agent per play.
enum Planner {
    Alpha(Arc<AdaptiveModel>, Arc<LowerBound>),
    Table(Vec<usize>, usize),
    QLearning { states: usize, actions: usize, start: usize, epsilon: f64, discount: f64 },
    Exploit(Box<ExploitAgent>),
}

impl Planner {
    fn agent(&self, seed: u64) -> Box<dyn Agent> {
        match self {
            Planner::Alpha(m, l) => Box::new(AlphaAgent::new(m.clone(), l.clone())),
            Planner::Table(p, s) => Box::new(StatePolicyAgent::new(p.clone(), *s)),
            Planner::QLearning {
                states,
                actions,
                start,
                epsilon,
                discount,
            } => Box::new(QLearningAgent::new(*states, *actions, *start, *epsilon, *discount, seed)),
            Planner::Exploit(a) => a.clone(),
        }
    }
}

struct Offline {
    planner: Planner,
    delta: Option<f64>,
    solve_seconds: Option<f64>,
    backups: Option<usize>,
}

impl Offline {
    fn plain(planner: Planner) -> Self {
        Self {
            planner,
            delta: None,
            solve_seconds: None,
            backups: None,
        }
    }
}

fn solved(skeleton: &TaskSkeleton, hyps: &HypothesisSet, solver: &SolveConfig) -> Result<Offline, HarnessError> {
    let adaptive = if skeleton.num_observations.is_some() {
        build_bapomdp(skeleton, hyps)?
    } else {
        build_bamdp(skeleton, hyps)?
    };
    let started = Instant::now();
    let r = solve(&adaptive.model, solver);
    Ok(Offline {
        delta: Some(r.delta),
        solve_seconds: Some(started.elapsed().as_secs_f64()),
        backups: Some(r.backup_count),
        planner: Planner::Alpha(Arc::new(adaptive), Arc::new(r.lower)),
    })
}

fn greedy_table(mdp: &DiscreteMdp, start: usize) -> Planner {
    Planner::Table(mdp_value_iteration(mdp, VI_TOLERANCE).policy, start)
}

fn offline(
    cfg: &ExperimentConfig,
    w: &World,
    index: usize,
    epsilon: Option<f64>,
) -> Result<Offline, HarnessError> {
    let solver = SolveConfig {
        seed: child_seed(cfg.seed, index, Phase::Solve, 0),
        ..cfg.solver.clone()
    };
    let sample = || -> Result<HypothesisSet, HarnessError> {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(cfg.seed, index, Phase::Hypotheses, 0));
        Ok(sample_hypotheses(&w.skeleton, &w.prior, cfg.k, &mut rng)?)
    };
    let known = |h: &Hypothesis| -> Result<Offline, HarnessError> {
        match &w.env {
            Truth::Mdp { start, .. } => Ok(Offline::plain(greedy_table(&w.skeleton.mdp(h), *start))),
            Truth::Pomdp { .. } => solved(&w.skeleton, &HypothesisSet::new(vec![h.clone()]), &solver),
        }
    };
    let mdp_start = match &w.env {
        Truth::Mdp { start, .. } => Some(*start),
        Truth::Pomdp { .. } => None,
    };
    let need_mdp = || {
        mdp_start.ok_or_else(|| HarnessError::Config(format!("{} needs a fully observable domain", cfg.algorithm)))
    };
    match cfg.algorithm {
        AlgorithmKey::McBrl => solved(&w.skeleton, &sample()?, &solver),
        AlgorithmKey::McBrlPlus => {
            let mut hyps = sample()?;
            hyps.insert_truth(w.truth.clone());
            solved(&w.skeleton, &hyps, &solver)
        }
        AlgorithmKey::UpperBound => known(&w.truth),
        AlgorithmKey::PriorModel => {
            let mean = w
                .prior
                .mean()
                .ok_or_else(|| HarnessError::Config("prior has no closed-form mean".into()))?;
            known(&mean)
        }
        AlgorithmKey::QLearning => Ok(Offline::plain(Planner::QLearning {
            states: w.skeleton.num_states,
            actions: w.skeleton.num_actions,
            start: need_mdp()?,
            epsilon: epsilon.unwrap_or(0.0),
            discount: w.skeleton.discount,
        })),
        AlgorithmKey::Exploit => {
            need_mdp()?;
            Ok(Offline::plain(Planner::Exploit(Box::new(ExploitAgent::new(&w.skeleton, &sample()?)?))))
        }
        AlgorithmKey::Tft | AlgorithmKey::Pavlov => {
            let policy = if cfg.algorithm == AlgorithmKey::Tft { TIT_FOR_TAT } else { PAVLOV };
            Ok(Offline::plain(Planner::Table(policy.to_vec(), need_mdp()?)))
        }
    }
}

/// Runs simulation `index`. Setup errors and belief-filter failures are
/// recorded in the result rather than returned.
pub fn simulate(cfg: &ExperimentConfig, index: usize, epsilon: Option<f64>) -> SimulationRecord {
    let mut rec = SimulationRecord {
        index,
        total: f64::NAN,
        episode_rewards: Vec::new(),
        failure: None,
        delta: None,
        solve_seconds: None,
        backups: None,
    };
    let prepared = world(cfg, index).and_then(|w| offline(cfg, &w, index, epsilon).map(|o| (w, o)));
    let (w, off) = match prepared {
        Ok(v) => v,
        Err(e) => {
            rec.failure = Some(e.to_string());
            return rec;
        }
    };
    rec.delta = off.delta;
    rec.solve_seconds = off.solve_seconds;
    rec.backups = off.backups;

    let mut totals = Vec::with_capacity(cfg.plays);
    let mut episodes: Vec<Vec<f64>> = Vec::with_capacity(cfg.plays);
    for play in 0..cfg.plays {
        let env_seed = child_seed(cfg.seed, index, Phase::Environment, play as u64);
        let mut env: Box<dyn Environment> = match &w.env {
            Truth::Mdp { mdp, start } => Box::new(MdpEnvironment::new(mdp.clone(), *start, env_seed)),
            Truth::Pomdp { pomdp, ends } => Box::new(PomdpEnvironment::new(pomdp.clone(), ends.clone(), env_seed)),
        };
        let mut agent = off.planner.agent(child_seed(cfg.seed, index, Phase::Agent, play as u64));
        let trace = run_online(agent.as_mut(), env.as_mut(), cfg.budget, false);
        if let Some(f) = trace.failure {
            rec.failure = Some(format!("play {play}: {f}"));
            return rec;
        }
        totals.push(trace.total_reward());
        episodes.push(trace.episode_rewards);
    }
    rec.total = totals.iter().sum::<f64>() / totals.len() as f64;
    if let Budget::Episodes { count, .. } = cfg.budget {
        let longest = episodes.iter().map(Vec::len).max().unwrap_or(0);
        rec.episode_rewards = episode_means(&episodes, count.min(longest));
    }
    rec
}

/// Worker pool sized by [`WORKERS_VAR`], defaulting to the available cores.
pub fn worker_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let workers = match std::env::var(WORKERS_VAR) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| HarnessError::Config(format!("{WORKERS_VAR}={v} is not a positive integer")))?,
        Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))
}

fn batch(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, epsilon: Option<f64>) -> Vec<SimulationRecord> {
    pool.install(|| {
        (0..cfg.simulations)
            .into_par_iter()
            .map(|i| simulate(cfg, i, epsilon))
            .collect()
    })
}

fn row(cfg: &ExperimentConfig, records: Vec<SimulationRecord>) -> Result<ResultRow, HarnessError> {
    let totals: Vec<f64> = records.iter().filter(|r| r.failure.is_none()).map(|r| r.total).collect();
    let failures = records.len() - totals.len();
    let (mean, two_se) = match totals.len() {
        0 => {
            let first = records.iter().find_map(|r| r.failure.clone()).unwrap_or_default();
            return Err(HarnessError::Config(format!("every simulation failed; first error: {first}")));
        }
        1 => (totals[0], f64::NAN),
        _ => summarize(&totals)?,
    };
    let episode_means = match cfg.budget {
        Budget::Episodes { count, .. } => {
            let series: Vec<Vec<f64>> = records
                .iter()
                .filter(|r| r.failure.is_none())
                .map(|r| r.episode_rewards.clone())
                .collect();
            Some(episode_means(&series, count))
        }
        Budget::Steps(_) => None,
    };
    Ok(ResultRow {
        domain: cfg.domain,
        algorithm: cfg.algorithm,
        mean,
        two_se,
        n: totals.len(),
        failures,
        totals,
        episode_means,
        epsilon: None,
        epsilon_sweep: Vec::new(),
        records,
    })
}

/// Runs every simulation of `cfg` and aggregates them. Q-learning runs one
/// batch per exploration rate and reports the best.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable, HarnessError> {
    cfg.validate()?;
    let pool = worker_pool()?;
    let result = if cfg.algorithm == AlgorithmKey::QLearning {
        let mut best: Option<ResultRow> = None;
        let mut sweep = Vec::new();
        for &eps in &cfg.epsilon_grid {
            let mut r = row(cfg, batch(cfg, &pool, Some(eps)))?;
            r.epsilon = Some(eps);
            sweep.push((eps, r.mean));
            if best.as_ref().is_none_or(|b| r.mean > b.mean) {
                best = Some(r);
            }
        }
        let mut b = best.expect("nonempty grid");
        b.epsilon_sweep = sweep;
        b
    } else {
        row(cfg, batch(cfg, &pool, None))?
    };
    Ok(ResultTable { rows: vec![result] })
}

/// Cross-simulation mean reward of each episode.
pub fn learning_curve(cfg: &ExperimentConfig) -> Result<Vec<f64>, HarnessError> {
    if !matches!(cfg.budget, Budget::Episodes { .. }) {
        return Err(HarnessError::Config(format!(
            "learning curves need an episode budget; {} runs by steps",
            cfg.domain
        )));
    }
    let table = run_experiment(cfg)?;
    Ok(table.rows[0].episode_means.clone().unwrap_or_default())
}
