//! Monte Carlo Bayesian reinforcement learning.
//!
//! The offline phase samples `K` hypotheses about the unknown parameters of a
//! task from a prior ([`mcbrl::sample_hypotheses`]), compiles them into a
//! discrete mixed-observability POMDP whose hidden component indexes the
//! hypothesis ([`mcbrl::build_bamdp`], [`mcbrl::build_bapomdp`]), and solves
//! it with a gap-certified point-based solver ([`solver::solve`]). The online
//! phase tracks the posterior over hypotheses and follows the solved policy
//! ([`mcbrl::run_online`]).
//!
//! [`policy`] converts alpha-vector policies to policy graphs and evaluates
//! the sample-complexity regret bound, [`domains`] provides the Chain, Tiger
//! and iterated prisoner's dilemma benchmarks with their baselines, and
//! [`harness`] runs seeded, parallel experiment batches.

pub mod domains;
pub mod harness;
pub mod mcbrl;
pub mod model;
pub mod policy;
pub mod solver;

pub use mcbrl::{
    build_bamdp, build_bapomdp, expected_mdp, run_online, sample_hypotheses, AdaptiveModel, HypothesisSet,
    Prior, TaskSkeleton,
};
pub use model::{
    belief_update_flat, belief_update_momdp, mdp_value_iteration, parse_model_file, validate_model, DiscreteMdp,
    DiscretePomdp, HiddenBelief, MomdpModel,
};
pub use policy::{execute_graph, regret_bound, required_samples, to_policy_graph, BoundInputs, PolicyGraph};
pub use solver::{initialize_bounds, point_backup, policy_action, solve, SolveConfig, SolveResult};
