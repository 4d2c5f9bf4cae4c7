//! Point-based solver for MOMDPs with certified lower and upper bounds.
//!
//! Alpha vectors live over the hidden component only, one set per observed
//! state. The lower bound starts from blind and observed-state feedback
//! policies, the upper bound from the fully observable relaxation, and
//! gap-guided trials tighten both until a stopping criterion fires.

mod blocks;
mod bounds;
mod hsvi;
mod io;
mod relax;

pub use bounds::{AlphaVector, LowerBound, UpperBound};
pub use hsvi::{initialize_bounds, point_backup, policy_action, solve, Progress, SolveConfig, SolveResult};
pub use io::{read_policy, write_policy, PolicyFile};
pub use relax::{feedback_policy_values, relaxation_values};
