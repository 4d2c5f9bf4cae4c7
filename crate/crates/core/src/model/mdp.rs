//! Fully observable discrete MDPs and Bellman value iteration.

use serde::{Deserialize, Serialize};

use super::validate::{Checker, Validate, Violation};

/// Dense discrete MDP. Tensors are row-major `[s][a][s']`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMdp {
    pub num_states: usize,
    pub num_actions: usize,
    pub transition: Vec<f64>,
    pub reward: Vec<f64>,
    pub discount: f64,
}

impl DiscreteMdp {
    #[inline]
    pub fn index(&self, s: usize, a: usize, s2: usize) -> usize {
        (s * self.num_actions + a) * self.num_states + s2
    }

    #[inline]
    pub fn t(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.transition[self.index(s, a, s2)]
    }

    #[inline]
    pub fn r(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.reward[self.index(s, a, s2)]
    }

    /// Next-state distribution `T[s][a][·]`.
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = self.index(s, a, 0);
        &self.transition[start..start + self.num_states]
    }

    pub fn reward_row(&self, s: usize, a: usize) -> &[f64] {
        let start = self.index(s, a, 0);
        &self.reward[start..start + self.num_states]
    }

    /// `Σ_{s'} T[s][a][s'] R[s][a][s']`.
    pub fn expected_reward(&self, s: usize, a: usize) -> f64 {
        self.row(s, a)
            .iter()
            .zip(self.reward_row(s, a))
            .map(|(p, r)| p * r)
            .sum()
    }

    /// `max |R(s,a,s')|`.
    pub fn max_abs_reward(&self) -> f64 {
        self.reward.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// One-step lookahead value of `a` in `s` under `values`.
    pub fn q_value(&self, values: &[f64], s: usize, a: usize) -> f64 {
        self.row(s, a)
            .iter()
            .zip(self.reward_row(s, a))
            .zip(values)
            .map(|((p, r), v)| p * (r + self.discount * v))
            .sum()
    }

    /// Greedy action for `s`, ties broken towards the lowest action index.
    pub fn greedy_action(&self, values: &[f64], s: usize) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for a in 0..self.num_actions {
            let q = self.q_value(values, s, a);
            if q > best.1 {
                best = (a, q);
            }
        }
        best
    }

    /// Value of a fixed deterministic policy, by iterative evaluation.
    pub fn evaluate_policy(&self, policy: &[usize], tol: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.num_states];
        loop {
            let next: Vec<f64> = (0..self.num_states)
                .map(|s| self.q_value(&v, s, policy[s]))
                .collect();
            let residual = sup_distance(&next, &v);
            v = next;
            if residual <= tol {
                return v;
            }
        }
    }
}

impl Validate for DiscreteMdp {
    fn violations(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        c.discount(self.discount);
        let n = self.num_states * self.num_actions * self.num_states;
        let t_ok = c.length("transition", self.transition.len(), n);
        let r_ok = c.length("reward", self.reward.len(), n);
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                if t_ok {
                    c.stochastic_row("transition", || format!("(s={s},a={a})"), self.row(s, a));
                }
                if r_ok {
                    c.finite("reward", || format!("(s={s},a={a})"), self.reward_row(s, a));
                }
            }
        }
        c.found
    }
}

/// Converged state values and the greedy policy they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueIteration {
    pub values: Vec<f64>,
    pub policy: Vec<usize>,
    pub iterations: usize,
}

/// Bellman value iteration until the sup-norm residual drops to `tol`.
///
/// The returned values satisfy `‖BV − V‖∞ ≤ tol` and the policy is greedy
/// with respect to them, lowest action index on ties.
pub fn mdp_value_iteration(mdp: &DiscreteMdp, tol: f64) -> ValueIteration {
    mdp_value_iteration_from(mdp, tol, vec![0.0; mdp.num_states])
}

/// As [`mdp_value_iteration`], warm-started from `initial`.
pub fn mdp_value_iteration_from(mdp: &DiscreteMdp, tol: f64, initial: Vec<f64>) -> ValueIteration {
    assert!(tol > 0.0, "value iteration tolerance must be positive");
    assert_eq!(initial.len(), mdp.num_states);
    let mut v = initial;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next: Vec<f64> = (0..mdp.num_states)
            .map(|s| mdp.greedy_action(&v, s).1)
            .collect();
        let residual = sup_distance(&next, &v);
        v = next;
        // ‖BV_{k+1} − V_{k+1}‖ ≤ γ‖V_{k+1} − V_k‖ ≤ tol.
        if residual <= tol {
            break;
        }
    }
    let policy = (0..mdp.num_states).map(|s| mdp.greedy_action(&v, s).0).collect();
    ValueIteration {
        values: v,
        policy,
        iterations,
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate::validate_model;

    fn single_state(reward: f64, discount: f64) -> DiscreteMdp {
        DiscreteMdp {
            num_states: 1,
            num_actions: 1,
            transition: vec![1.0],
            reward: vec![reward],
            discount,
        }
    }

    #[test]
    fn geometric_series() {
        let vi = mdp_value_iteration(&single_state(1.0, 0.9), 1e-10);
        assert!((vi.values[0] - 10.0).abs() < 1e-8);
    }

    #[test]
    fn two_state_chain_matches_hand_solution() {
        // s0 --a0, r=1--> s1; s0 --a1, r=0--> s0; s1 self-loops with r=2. γ = 0.5.
        // V(s1) = 2 / (1 - 0.5) = 4, V(s0) = 1 + 0.5 * 4 = 3.
        let mut mdp = DiscreteMdp {
            num_states: 2,
            num_actions: 2,
            transition: vec![0.0; 8],
            reward: vec![0.0; 8],
            discount: 0.5,
        };
        let i = mdp.index(0, 0, 1);
        mdp.transition[i] = 1.0;
        mdp.reward[i] = 1.0;
        let i = mdp.index(0, 1, 0);
        mdp.transition[i] = 1.0;
        for a in 0..2 {
            let i = mdp.index(1, a, 1);
            mdp.transition[i] = 1.0;
            mdp.reward[i] = 2.0;
        }
        validate_model(&mdp).unwrap();
        let vi = mdp_value_iteration(&mdp, 1e-12);
        assert!((vi.values[1] - 4.0).abs() < 1e-9);
        assert!((vi.values[0] - 3.0).abs() < 1e-9);
        assert_eq!(vi.policy, vec![0, 0]);
    }

    #[test]
    fn ties_go_to_lowest_action() {
        let mdp = DiscreteMdp {
            num_states: 1,
            num_actions: 3,
            transition: vec![1.0; 3],
            reward: vec![1.0; 3],
            discount: 0.9,
        };
        assert_eq!(mdp_value_iteration(&mdp, 1e-9).policy, vec![0]);
    }

    #[test]
    fn bad_row_is_named() {
        let mut mdp = single_state(1.0, 0.9);
        mdp.transition[0] = 0.9;
        let v = validate_model(&mdp).unwrap_err();
        assert_eq!(v.len(), 1);
        assert!(v[0].location.contains("s=0,a=0"), "{}", v[0]);
    }

    #[test]
    fn non_finite_reward_is_reported() {
        let mut mdp = single_state(f64::NAN, 0.9);
        mdp.reward[0] = f64::INFINITY;
        let v = validate_model(&mdp).unwrap_err();
        assert_eq!(v[0].tensor, "reward");
    }
}
