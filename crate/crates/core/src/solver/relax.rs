//! Value iteration over the flattened `(x, y)` state space, done directly on
//! the MOMDP kernels so block-diagonal structure is never expanded.
//!
//! Iterations start from `±R_max/(1−γ)`; by monotonicity of the Bellman
//! operators every iterate stays on the correct side of the fixed point, so
//! the results are certified bounds without a residual correction.

use crate::model::MomdpModel;

/// `out[y] = r(x,a,y) + γ Σ_{x'} Σ_{y'} T(x,y,a,x',y') v[x'][y']`.
pub(crate) fn q_row(m: &MomdpModel, v: &[Vec<f64>], x: usize, a: usize, out: &mut [f64]) {
    out.copy_from_slice(m.expected_reward(x, a));
    for &x2 in m.successors(x, a) {
        m.kernel(x, a, x2).back_project_add(&v[x2], m.discount(), out);
    }
}

fn extreme(m: &MomdpModel, sign: f64) -> Vec<Vec<f64>> {
    let bound = sign * m.r_max() / (1.0 - m.discount());
    vec![vec![bound; m.num_hidden()]; m.num_observed()]
}

fn residual(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Fully observable relaxation: an upper bound on every `V*(x, y)`.
/// Returns the values and the greedy action per `(x, y)`.
pub fn relaxation_values(m: &MomdpModel, tol: f64, max_iterations: usize) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let (nx, ny, na, _) = m.dims();
    let mut v = extreme(m, 1.0);
    let mut policy = vec![vec![0; ny]; nx];
    let mut q = vec![0.0; ny];
    for _ in 0..max_iterations {
        let mut next = vec![vec![f64::NEG_INFINITY; ny]; nx];
        for x in 0..nx {
            for a in 0..na {
                q_row(m, &v, x, a, &mut q);
                for y in 0..ny {
                    if q[y] > next[x][y] {
                        next[x][y] = q[y];
                        policy[x][y] = a;
                    }
                }
            }
        }
        // Iterates decrease monotonically; clamp guards against round-off.
        for (nr, vr) in next.iter_mut().zip(&v) {
            for (n, o) in nr.iter_mut().zip(vr) {
                *n = n.min(*o);
            }
        }
        let r = residual(&next, &v);
        v = next;
        if r <= tol {
            break;
        }
    }
    (v, policy)
}

/// Value of the observed-state feedback policy `policy[x]` from below.
pub fn feedback_policy_values(m: &MomdpModel, policy: &[usize], tol: f64, max_iterations: usize) -> Vec<Vec<f64>> {
    let (nx, ny, _, _) = m.dims();
    let mut v = extreme(m, -1.0);
    for _ in 0..max_iterations {
        let mut next = vec![vec![0.0; ny]; nx];
        for x in 0..nx {
            q_row(m, &v, x, policy[x], &mut next[x]);
            for (n, o) in next[x].iter_mut().zip(&v[x]) {
                *n = n.max(*o);
            }
        }
        let r = residual(&next, &v);
        v = next;
        if r <= tol {
            break;
        }
    }
    v
}
