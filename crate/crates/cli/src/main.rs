//! `mcbrl`: solve model files, run benchmark experiments, evaluate the regret
//! bound and reproduce the result tables.
//!
//! Set `MCBRL_WORKERS` to cap the number of simulation threads.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mcbrl_core::domains::DomainKey;
use mcbrl_core::harness::{
    learning_curve, run_experiment, run_table, table1, table2, table3, write_results, AlgorithmKey, ExperimentConfig,
    ResultRow, ResultTable, Scale, CHAIN_STEPS, TIGER_EPISODES, TIGER_MAX_STEPS,
};
use mcbrl_core::mcbrl::Budget;
use mcbrl_core::model::{parse_model_file, validate_model};
use mcbrl_core::policy::{prune_unreachable, regret_bound_terms, required_samples, to_policy_graph, BoundInputs};
use mcbrl_core::solver::{solve, write_policy, SolveConfig};

#[derive(Parser)]
#[command(name = "mcbrl", version, about = "Monte Carlo Bayesian reinforcement learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a POMDP, MDP or MOMDP model file.
    Solve(SolveArgs),
    /// Run one algorithm on one benchmark domain.
    Bench(BenchArgs),
    /// Per-episode mean reward of MC-BRL on Tiger.
    Curve(CurveArgs),
    /// Evaluate the regret bound, or the sample count needed for a target.
    Bound(BoundArgs),
    /// Chain results.
    Table1(TableArgs),
    /// Tiger results.
    Table2(TableArgs),
    /// Iterated prisoner's dilemma results.
    Table3(TableArgs),
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Target gap at the initial belief.
    #[arg(long)]
    gap: Option<f64>,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
    /// Maximum number of point backups.
    #[arg(long)]
    backups: Option<usize>,
}

impl SolverArgs {
    fn apply(&self, cfg: &mut SolveConfig) {
        if self.gap.is_some() || self.budget.is_some() || self.backups.is_some() {
            cfg.target_gap = self.gap;
            cfg.time_budget = self.budget;
            cfg.max_backups = self.backups;
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    model: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the alpha-vector policy here as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Convert the policy to a graph of this horizon and print it.
    #[arg(long)]
    graph: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    domain: DomainKey,
    /// Algorithm key; defaults to mc-brl.
    #[arg(long)]
    algo: Option<AlgorithmKey>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    sims: Option<usize>,
    /// Steps per play.
    #[arg(long, conflicts_with = "episodes")]
    steps: Option<usize>,
    /// Episodes per play (episodic domains only).
    #[arg(long)]
    episodes: Option<usize>,
    /// Independent plays per simulation.
    #[arg(long)]
    plays: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output stem for `<out>.csv` and `<out>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Start from a TOML experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long = "K", default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    sims: usize,
    #[arg(long, default_value_t = TIGER_EPISODES)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write `episode,mean` rows here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// Policy graph size in nodes.
    #[arg(long)]
    policy_size: usize,
    #[arg(long)]
    observations: usize,
    #[arg(long)]
    actions: usize,
    /// Number of sampled hypotheses; ignored with `--target`.
    #[arg(long = "K", default_value_t = 1)]
    k: usize,
    /// Failure probability.
    #[arg(long)]
    tau: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    r_max: f64,
    /// Solver gap.
    #[arg(long)]
    delta: f64,
    /// Report the smallest K whose bound is at most this.
    #[arg(long)]
    target: Option<f64>,
}

#[derive(Args)]
struct TableArgs {
    /// Use the original simulation counts.
    #[arg(long)]
    full: bool,
    /// Override the simulation count of every row.
    #[arg(long)]
    sims: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for per-row CSV and JSON files.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Table1(a) => cmd_table(a, table1),
        Command::Table2(a) => cmd_table(a, table2),
        Command::Table3(a) => cmd_table(a, table3),
    }
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let parsed = parse_model_file(&text)?;
    let kind = parsed.kind();
    let model = parsed.into_momdp();
    if let Err(violations) = validate_model(&model) {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        bail!("invalid model:\n  {}", lines.join("\n  "));
    }
    let mut cfg = SolveConfig {
        seed: a.seed,
        ..SolveConfig::default()
    };
    a.solver.apply(&mut cfg);
    if !cfg.has_stopping_criterion() {
        bail!("give at least one of --gap, --budget, --backups");
    }
    let result = solve(&model, &cfg);
    let (nx, ny, na, no) = model.dims();
    println!("model      {kind} |X|={nx} |Y|={ny} |A|={na} |O|={no} gamma={}", model.discount());
    println!("lower      {:.6}", result.lower_value);
    println!("upper      {:.6}", result.upper_value);
    println!("delta      {:.6}", result.delta);
    println!("backups    {}", result.backup_count);
    println!("alphas     {}", result.lower.len());
    println!("seconds    {:.3}", result.wall_time);
    if let Some(path) = &a.out {
        std::fs::write(path, write_policy(&result)).with_context(|| format!("writing {}", path.display()))?;
        println!("policy     {}", path.display());
    }
    if let Some(horizon) = a.graph {
        let graph = prune_unreachable(to_policy_graph(&result, &model, horizon));
        println!("graph      {} nodes ({} before pruning)", graph.num_nodes(), graph.nodes_before_pruning);
        print!("{}", graph.to_adjacency_text());
    }
    Ok(())
}

/// The desk-scale table config for this pair, if one exists, so that `k`,
/// plays, budget and solver limits match the tables.
fn preset_config(domain: DomainKey, algorithm: AlgorithmKey) -> ExperimentConfig {
    [table1, table2, table3]
        .iter()
        .flat_map(|t| t(Scale::Desk, 0))
        .find(|c| c.domain == domain && c.algorithm == algorithm)
        .unwrap_or_else(|| {
            let budget = if domain.is_episodic() {
                Budget::Episodes {
                    count: TIGER_EPISODES,
                    max_steps: TIGER_MAX_STEPS,
                }
            } else {
                Budget::Steps(CHAIN_STEPS)
            };
            ExperimentConfig::new(domain, algorithm, 100, budget)
        })
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => preset_config(a.domain, a.algo.unwrap_or(AlgorithmKey::McBrl)),
    };
    cfg.domain = a.domain;
    if let Some(algo) = a.algo {
        cfg.algorithm = algo;
    }
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(s) = a.sims {
        cfg.simulations = s;
    }
    if let Some(p) = a.plays {
        cfg.plays = p;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.steps {
        cfg.budget = Budget::Steps(n);
    }
    if let Some(n) = a.episodes {
        cfg.budget = Budget::Episodes {
            count: n,
            max_steps: TIGER_MAX_STEPS,
        };
    }
    a.solver.apply(&mut cfg.solver);
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    cfg.validate()?;
    let table = run_experiment(&cfg)?;
    print_table(&table);
    if let Some(stem) = &cfg.out {
        let (csv, json) = write_results(&cfg, &table.rows[0], stem)?;
        println!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}

fn cmd_curve(a: CurveArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::new(
        DomainKey::Tiger,
        AlgorithmKey::McBrl,
        a.sims,
        Budget::Episodes {
            count: a.episodes,
            max_steps: TIGER_MAX_STEPS,
        },
    );
    cfg.k = a.k;
    cfg.seed = a.seed;
    cfg.solver.target_gap = Some(0.1);
    cfg.solver.max_backups = Some(200);
    a.solver.apply(&mut cfg.solver);
    let curve = learning_curve(&cfg)?;
    let mut text = String::from("episode,mean\n");
    for (i, v) in curve.iter().enumerate() {
        text.push_str(&format!("{},{v}\n", i + 1));
    }
    match &a.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_bound(a: BoundArgs) -> Result<()> {
    let inp = BoundInputs {
        policy_size: a.policy_size,
        num_observations: a.observations,
        num_actions: a.actions,
        k: a.k,
        tau: a.tau,
        gamma: a.gamma,
        r_max: a.r_max,
        delta: a.delta,
    };
    if let Some(target) = a.target {
        println!("K          {}", required_samples(&inp, target)?);
        return Ok(());
    }
    let t = regret_bound_terms(&inp)?;
    println!("complexity {:.6}", t.complexity);
    println!("scale      {:.6}", t.scale);
    println!("sampling   {:.6}", t.sampling);
    println!("delta      {:.6}", t.delta);
    println!("bound      {:.6}", t.total);
    Ok(())
}

fn cmd_table(a: TableArgs, preset: fn(Scale, u64) -> Vec<ExperimentConfig>) -> Result<()> {
    let scale = if a.full { Scale::Full } else { Scale::Desk };
    let mut configs = preset(scale, a.seed);
    if let Some(s) = a.sims {
        for c in &mut configs {
            c.simulations = s;
        }
    }
    let table = run_table(&configs)?;
    print_table(&table);
    if let Some(dir) = &a.out {
        for (cfg, row) in configs.iter().zip(&table.rows) {
            write_results(cfg, row, &row_stem(dir, row))?;
        }
        println!("wrote results to {}", dir.display());
    }
    Ok(())
}

fn row_stem(dir: &Path, row: &ResultRow) -> PathBuf {
    dir.join(format!("{}-{}", row.domain, row.algorithm))
}

fn print_table(table: &ResultTable) {
    println!("{:<16} {:<13} {:>12} {:>10} {:>6} {:>8}", "domain", "algorithm", "mean", "2se", "n", "failed");
    for r in &table.rows {
        let eps = r.epsilon.map(|e| format!("  epsilon={e:.2}")).unwrap_or_default();
        println!(
            "{:<16} {:<13} {:>12.2} {:>10.2} {:>6} {:>8}{eps}",
            r.domain.as_str(),
            r.algorithm.as_str(),
            r.mean,
            r.two_se,
            r.n,
            r.failures
        );
    }
}
