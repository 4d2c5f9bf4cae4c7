//! Policy graphs and the regret bound of MC-BRL policies.

mod bound;
mod graph;

pub use bound::{regret_bound, regret_bound_terms, required_samples, BoundError, BoundInputs, BoundTerms};
pub use graph::{evaluate_graph, execute_graph, observation_symbols, prune_unreachable, to_policy_graph, PolicyGraph};
