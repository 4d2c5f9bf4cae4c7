//! Discrete MDP, POMDP and MOMDP models, their validation, Bayes filters and
//! exact value iteration.

pub mod belief;
pub mod format;
pub mod mdp;
pub mod momdp;
pub mod pomdp;
pub mod validate;

pub use belief::{BeliefError, HiddenBelief, BELIEF_TOLERANCE};
pub use format::{parse_model_file, serialize_model, write_pomdp_file, FormatError, ParsedModel};
pub use mdp::{mdp_value_iteration, mdp_value_iteration_from, DiscreteMdp, ValueIteration};
pub use momdp::{belief_update_momdp, HiddenKernel, MomdpModel, MomdpParts, RewardKernel};
pub use pomdp::{belief_update_flat, DiscretePomdp};
pub use validate::{validate_model, Validate, Violation, ROW_SUM_TOLERANCE};
