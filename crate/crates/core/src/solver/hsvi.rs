//! Gap-guided point-based solving.
//!
//! Each trial walks down from `(x₀, b⁰)`, taking the action with the best
//! upper Q-value and the `(x', o)` branch with the largest probability-weighted
//! excess gap, then backs up both bounds deepest first.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::blocks::{block_model, common_block_size};
use super::bounds::{dot, AlphaVector, LowerBound, UpperBound};
use super::relax::{feedback_policy_values, relaxation_values};
use crate::model::{HiddenBelief, MomdpModel};
use crate::policy::{evaluate_graph, to_policy_graph, PolicyGraph};

/// Residual at which the initial value iterations stop.
const INIT_TOLERANCE: f64 = 1e-9;
const INIT_MAX_ITERATIONS: usize = 100_000;
/// Lookahead used when turning a block policy into a controller.
const BLOCK_GRAPH_HORIZON: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// Wall-clock limit in seconds.
    pub time_budget: Option<f64>,
    /// Stop once `upper − lower` at the initial belief is at most this.
    pub target_gap: Option<f64>,
    /// Stop after this many point backups.
    pub max_backups: Option<usize>,
    /// Seeds exploration tie-breaks.
    pub seed: u64,
    /// Trials aim below `max(target_gap, trial_gap_fraction · current gap)`.
    pub trial_gap_fraction: f64,
    /// Also seed the lower bound with the values of the greedy policies of the
    /// fully observable relaxation, restricted to the observed component.
    pub seed_feedback_policies: bool,
    /// Cap on the number of such policies.
    pub max_feedback_policies: usize,
    /// When hidden values split into blocks that never mix, solve each block
    /// separately and use the sum of their upper bounds as a second bound.
    pub block_bounds: bool,
    /// Backup budget for each block solve.
    pub block_max_backups: usize,
    /// Target gap for each block solve.
    pub block_target_gap: f64,
    /// Turn each block policy into a controller and seed the lower bound with
    /// its value on the full model.
    pub seed_block_policies: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            time_budget: None,
            target_gap: Some(0.1),
            max_backups: Some(20_000),
            seed: 0,
            trial_gap_fraction: 0.5,
            seed_feedback_policies: true,
            max_feedback_policies: 64,
            block_bounds: true,
            block_max_backups: 500,
            block_target_gap: 0.01,
            seed_block_policies: false,
        }
    }
}

impl SolveConfig {
    pub fn with_backups(max_backups: usize) -> Self {
        Self {
            max_backups: Some(max_backups),
            target_gap: None,
            ..Self::default()
        }
    }

    pub fn has_stopping_criterion(&self) -> bool {
        self.time_budget.is_some() || self.target_gap.is_some() || self.max_backups.is_some()
    }
}

/// Bounds at the initial belief after a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub backups: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub lower: LowerBound,
    pub upper: UpperBound,
    pub initial_observed: usize,
    pub initial_belief: Vec<f64>,
    pub lower_value: f64,
    pub upper_value: f64,
    /// `upper_value − lower_value`.
    pub delta: f64,
    pub backup_count: usize,
    pub wall_time: f64,
    pub history: Vec<Progress>,
    /// Largest `lower − upper` seen at any belief the solver touched.
    pub max_sandwich_violation: f64,
}

/// Best blind policy per action as the lower bound and the fully observable
/// relaxation as the upper bound.
pub fn initialize_bounds(m: &MomdpModel) -> (LowerBound, UpperBound) {
    let (nx, ny, na, _) = m.dims();
    let mut lower = LowerBound::new(nx, ny);
    for a in 0..na {
        let v = feedback_policy_values(m, &vec![a; nx], INIT_TOLERANCE, INIT_MAX_ITERATIONS);
        for (x, values) in v.into_iter().enumerate() {
            lower.insert(AlphaVector {
                observed_state: x,
                action: a,
                values,
            });
        }
    }
    let (corners, _) = relaxation_values(m, INIT_TOLERANCE, INIT_MAX_ITERATIONS);
    (lower, UpperBound::new(corners))
}

fn seed_feedback_policies(m: &MomdpModel, lower: &mut LowerBound, max_policies: usize) {
    let (nx, ny, na, _) = m.dims();
    let (_, greedy) = relaxation_values(m, INIT_TOLERANCE, INIT_MAX_ITERATIONS);
    let mut policies = BTreeSet::new();
    for y in 0..ny {
        let p: Vec<usize> = (0..nx).map(|x| greedy[x][y]).collect();
        if p.iter().all(|&a| a == p[0]) && na > 0 {
            continue; // blind, already present
        }
        policies.insert(p);
        if policies.len() >= max_policies {
            break;
        }
    }
    for p in policies {
        let v = feedback_policy_values(m, &p, INIT_TOLERANCE, INIT_MAX_ITERATIONS);
        for (x, values) in v.into_iter().enumerate() {
            lower.insert(AlphaVector {
                observed_state: x,
                action: p[x],
                values,
            });
        }
    }
}

/// Solves each hidden block on its own and returns the block upper bounds.
/// Optionally seeds `lower` with the value of every distinct block controller
/// run on the full model.
fn solve_blocks(m: &MomdpModel, cfg: &SolveConfig, size: usize, lower: &mut LowerBound) -> Vec<UpperBound> {
    let sub = SolveConfig {
        time_budget: None,
        target_gap: Some(cfg.block_target_gap),
        max_backups: Some(cfg.block_max_backups),
        block_bounds: false,
        ..cfg.clone()
    };
    let mut parts = Vec::new();
    let mut graphs = Vec::<PolicyGraph>::new();
    for k in 0..m.num_hidden() / size {
        let bm = block_model(m, k, size);
        let r = solve(&bm, &sub);
        if cfg.seed_block_policies {
            let g = to_policy_graph(&r, &bm, BLOCK_GRAPH_HORIZON);
            if !graphs
                .iter()
                .any(|h| h.actions == g.actions && h.edges == g.edges && h.symbols == g.symbols)
            {
                graphs.push(g);
            }
        }
        parts.push(r.upper);
    }
    for g in &graphs {
        let values = evaluate_graph(g, m, INIT_TOLERANCE, INIT_MAX_ITERATIONS);
        for (n, per_x) in values.into_iter().enumerate() {
            for (x, values) in per_x.into_iter().enumerate() {
                lower.insert(AlphaVector {
                    observed_state: x,
                    action: g.actions[n],
                    values,
                });
            }
        }
    }
    parts
}

struct Child {
    o: usize,
    prob: f64,
    belief: Vec<f64>,
}

struct Branch {
    x2: usize,
    /// `Σ_y b(y) T(x,y,a,x2,·)`.
    pred: Vec<f64>,
    children: Vec<Child>,
}

/// One-step lookahead from `(x, b)` for every action.
struct Expansion {
    x: usize,
    belief: Vec<f64>,
    reward: Vec<f64>,
    branches: Vec<Vec<Branch>>,
}

fn expand(m: &MomdpModel, x: usize, belief: &[f64]) -> Expansion {
    let (_, ny, na, _) = m.dims();
    let mut reward = Vec::with_capacity(na);
    let mut branches = Vec::with_capacity(na);
    for a in 0..na {
        reward.push(dot(m.expected_reward(x, a), belief));
        let mut per_action = Vec::new();
        for &x2 in m.successors(x, a) {
            let mut pred = vec![0.0; ny];
            m.kernel(x, a, x2).propagate_add(belief, &mut pred);
            let mut children = Vec::new();
            if pred.iter().any(|&p| p > 0.0) {
                for &o in m.observation_support(x2, a) {
                    let mut w: Vec<f64> = pred.iter().zip(m.z_column(x2, a, o)).map(|(p, z)| p * z).collect();
                    let prob: f64 = w.iter().sum();
                    if prob > 0.0 {
                        w.iter_mut().for_each(|v| *v /= prob);
                        children.push(Child { o, prob, belief: w });
                    }
                }
            }
            per_action.push(Branch { x2, pred, children });
        }
        branches.push(per_action);
    }
    Expansion {
        x,
        belief: belief.to_vec(),
        reward,
        branches,
    }
}

fn upper_q(m: &MomdpModel, upper: &UpperBound, e: &Expansion, a: usize) -> f64 {
    let future: f64 = e.branches[a]
        .iter()
        .flat_map(|br| br.children.iter().map(move |c| c.prob * upper.value(br.x2, &c.belief)))
        .sum();
    e.reward[a] + m.discount() * future
}

/// Bellman backup of the lower bound over an expansion.
fn backup_alpha(m: &MomdpModel, lower: &LowerBound, e: &Expansion) -> AlphaVector {
    let (_, ny, na, _) = m.dims();
    let bound = m.r_max() / (1.0 - m.discount());
    let mut best: Option<(f64, AlphaVector)> = None;
    let mut h = vec![0.0; ny];
    for a in 0..na {
        let mut values = m.expected_reward(e.x, a).to_vec();
        for br in &e.branches[a] {
            h.iter_mut().for_each(|v| *v = 0.0);
            let fallback = lower.best(br.x2, &br.pred).map_or(0, |(i, _)| i);
            for &o in m.observation_support(br.x2, a) {
                let idx = br
                    .children
                    .iter()
                    .find(|c| c.o == o)
                    .and_then(|c| lower.best(br.x2, &c.belief))
                    .map_or(fallback, |(i, _)| i);
                let alpha = &lower.alphas(br.x2)[idx].values;
                for ((hv, z), av) in h.iter_mut().zip(m.z_column(br.x2, a, o)).zip(alpha) {
                    *hv += z * av;
                }
            }
            m.kernel(e.x, a, br.x2).back_project_add(&h, m.discount(), &mut values);
        }
        values.iter_mut().for_each(|v| *v = v.clamp(-bound, bound));
        let v = dot(&values, &e.belief);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv + 1e-12 * (1.0 + bv.abs())) {
            best = Some((
                v,
                AlphaVector {
                    observed_state: e.x,
                    action: a,
                    values,
                },
            ));
        }
    }
    best.expect("at least one action").1
}

/// Point-based Bellman backup of the lower bound at `(x, b)`.
pub fn point_backup(m: &MomdpModel, lower: &LowerBound, x: usize, belief: &HiddenBelief) -> AlphaVector {
    backup_alpha(m, lower, &expand(m, x, belief.as_slice()))
}

/// Anytime solve. The reported `delta` is the exact gap at `(x₀, b⁰)`.
pub fn solve(m: &MomdpModel, cfg: &SolveConfig) -> SolveResult {
    let start = Instant::now();
    let (mut lower, mut upper) = initialize_bounds(m);
    if cfg.seed_feedback_policies {
        seed_feedback_policies(m, &mut lower, cfg.max_feedback_policies);
    }
    if cfg.block_bounds {
        if let Some(size) = common_block_size(m) {
            let parts = solve_blocks(m, cfg, size, &mut lower);
            upper = upper.with_blocks(size, parts);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x0 = m.initial_observed();
    let b0 = m.initial_hidden_belief().into_inner();
    let gamma = m.discount();
    let target = cfg.target_gap.unwrap_or(0.0).max(0.0);
    let mut backups = 0usize;
    let mut history = Vec::new();
    let mut violation = f64::NEG_INFINITY;
    let mut stalled = 0;
    let out_of_budget = |backups: usize| {
        cfg.max_backups.is_some_and(|n| backups >= n)
            || cfg.time_budget.is_some_and(|t| start.elapsed().as_secs_f64() >= t)
    };

    loop {
        let (lo, up) = (lower.value(x0, &b0), upper.value(x0, &b0));
        violation = violation.max(lo - up);
        history.push(Progress {
            backups,
            lower: lo,
            upper: up,
        });
        let gap = up - lo;
        let converged = match cfg.target_gap {
            Some(_) => gap <= target,
            None => gap <= 1e-9 * (1.0 + up.abs()),
        };
        if converged || out_of_budget(backups) || stalled >= 3 || !cfg.has_stopping_criterion() {
            break;
        }
        let eps = target.max(cfg.trial_gap_fraction * gap);
        let depth_cap = if m.r_max() > 0.0 {
            ((eps * (1.0 - gamma) / (2.0 * m.r_max())).ln() / gamma.ln()).ceil().max(1.0) as usize
        } else {
            1
        };

        // Descend.
        let mut path = vec![expand(m, x0, &b0)];
        let mut threshold = eps;
        for _ in 0..depth_cap {
            let e = path.last().expect("nonempty path");
            let mut best_a = 0;
            let mut best_q = f64::NEG_INFINITY;
            for a in 0..m.num_actions() {
                let q = upper_q(m, &upper, e, a);
                if a == 0 || q > best_q + 1e-12 * (1.0 + best_q.abs()) {
                    best_q = q;
                    best_a = a;
                }
            }
            threshold /= gamma;
            let mut best: Vec<(f64, usize, usize)> = Vec::new();
            let mut best_score = 0.0;
            for (bi, br) in e.branches[best_a].iter().enumerate() {
                for (ci, c) in br.children.iter().enumerate() {
                    let excess = upper.value(br.x2, &c.belief) - lower.value(br.x2, &c.belief) - threshold;
                    let score = c.prob * excess;
                    if score > best_score + 1e-12 {
                        best_score = score;
                        best.clear();
                        best.push((score, bi, ci));
                    } else if score > 0.0 && (score - best_score).abs() <= 1e-12 {
                        best.push((score, bi, ci));
                    }
                }
            }
            if best.is_empty() {
                break;
            }
            let (_, bi, ci) = best[if best.len() > 1 { rng.random_range(0..best.len()) } else { 0 }];
            let br = &e.branches[best_a][bi];
            let next = expand(m, br.x2, &br.children[ci].belief);
            path.push(next);
        }

        // Back up deepest first.
        let mut changed = false;
        while let Some(e) = path.pop() {
            if out_of_budget(backups) {
                break;
            }
            let alpha = backup_alpha(m, &lower, &e);
            changed |= lower.insert(alpha);
            let q = (0..m.num_actions())
                .map(|a| upper_q(m, &upper, &e, a))
                .fold(f64::NEG_INFINITY, f64::max);
            changed |= upper.insert(e.x, &e.belief, q);
            backups += 1;
            violation = violation.max(lower.value(e.x, &e.belief) - upper.value(e.x, &e.belief));
        }
        stalled = if changed { 0 } else { stalled + 1 };
    }

    let (lower_value, upper_value) = (lower.value(x0, &b0), upper.value(x0, &b0));
    SolveResult {
        lower,
        upper,
        initial_observed: x0,
        initial_belief: b0,
        lower_value,
        upper_value,
        delta: upper_value - lower_value,
        backup_count: backups,
        wall_time: start.elapsed().as_secs_f64(),
        history,
        max_sandwich_violation: violation,
    }
}

/// Action of the best lower-bound vector at `(x, b)`.
pub fn policy_action(result: &SolveResult, x: usize, belief: &HiddenBelief) -> usize {
    result.lower.best_action(x, belief.as_slice())
}
