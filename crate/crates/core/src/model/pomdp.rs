//! Flat discrete POMDPs and the Bayes filter over their states.

use serde::{Deserialize, Serialize};

use super::belief::{check_distribution, BeliefError};
use super::mdp::DiscreteMdp;
use super::validate::{Checker, Validate, Violation};

/// Discrete POMDP; the observation tensor is `Z[s'][a][o]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePomdp {
    pub mdp: DiscreteMdp,
    pub num_observations: usize,
    pub observation: Vec<f64>,
    pub initial_belief: Vec<f64>,
}

impl DiscretePomdp {
    pub fn num_states(&self) -> usize {
        self.mdp.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.mdp.num_actions
    }

    pub fn discount(&self) -> f64 {
        self.mdp.discount
    }

    #[inline]
    pub fn z(&self, s2: usize, a: usize, o: usize) -> f64 {
        self.observation[(s2 * self.mdp.num_actions + a) * self.num_observations + o]
    }

    pub fn observation_row(&self, s2: usize, a: usize) -> &[f64] {
        let start = (s2 * self.mdp.num_actions + a) * self.num_observations;
        &self.observation[start..start + self.num_observations]
    }
}

impl Validate for DiscretePomdp {
    fn violations(&self) -> Vec<Violation> {
        let mut c = Checker {
            found: self.mdp.violations(),
        };
        let (ns, na, no) = (self.mdp.num_states, self.mdp.num_actions, self.num_observations);
        if c.length("observation", self.observation.len(), ns * na * no) {
            for s2 in 0..ns {
                for a in 0..na {
                    c.stochastic_row(
                        "observation",
                        || format!("(s'={s2},a={a})"),
                        self.observation_row(s2, a),
                    );
                }
            }
        }
        if c.length("initial_belief", self.initial_belief.len(), ns) {
            if let Err(e) = check_distribution(&self.initial_belief) {
                c.push("initial_belief", String::new(), e.to_string());
            }
        }
        c.found
    }
}

/// One step of the Bayes filter:
/// `b'(s') ∝ Z[s'][a][o] · Σ_s T[s][a][s'] b(s)`.
pub fn belief_update_flat(
    pomdp: &DiscretePomdp,
    belief: &[f64],
    action: usize,
    observation: usize,
) -> Result<Vec<f64>, BeliefError> {
    let ns = pomdp.num_states();
    if belief.len() != ns {
        return Err(BeliefError::Dimension {
            got: belief.len(),
            want: ns,
        });
    }
    let mut next = vec![0.0; ns];
    for (s, &p) in belief.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (n, t) in next.iter_mut().zip(pomdp.mdp.row(s, action)) {
            *n += p * t;
        }
    }
    for (s2, n) in next.iter_mut().enumerate() {
        *n *= pomdp.z(s2, action, observation);
    }
    let total: f64 = next.iter().sum();
    if !(total > 0.0) {
        return Err(BeliefError::ImpossibleEvidence {
            action,
            observation,
        });
    }
    next.iter_mut().for_each(|n| *n /= total);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::tiger::{build_tiger, TigerSpec, LISTEN};

    #[test]
    fn tiger_listen_update() {
        let (_, pomdp) = build_tiger(&TigerSpec::symmetric(0.15));
        let b = belief_update_flat(&pomdp, &[0.5, 0.5], LISTEN, 0).unwrap();
        assert!((b[0] - 0.85).abs() < 1e-12);
        assert!((b[1] - 0.15).abs() < 1e-12);
    }

    #[test]
    fn uninformative_observation_keeps_belief() {
        let (_, mut pomdp) = build_tiger(&TigerSpec::symmetric(0.15));
        pomdp.observation.iter_mut().for_each(|z| *z = 0.5);
        let b = belief_update_flat(&pomdp, &[0.3, 0.7], LISTEN, 1).unwrap();
        assert!((b[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn impossible_observation_errors() {
        let (_, pomdp) = build_tiger(&TigerSpec::symmetric(0.0));
        // Perfect hearing: the tiger on the left is never heard on the right.
        let err = belief_update_flat(&pomdp, &[1.0, 0.0], LISTEN, 1).unwrap_err();
        assert!(matches!(err, BeliefError::ImpossibleEvidence { .. }));
    }
}
