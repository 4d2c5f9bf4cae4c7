//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)]

use mcbrl_core::domains::{build_tiger, TigerSpec};
use mcbrl_core::model::{HiddenKernel, MomdpModel, MomdpParts, RewardKernel};
use mcbrl_core::solver::LowerBound;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_row<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n)
        .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() })
        .collect();
    row[rng.random_range(0..n)] += 0.1;
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= s);
    row
}

/// Random dense MOMDP with sparsified rows and rewards in `[-1, 1)`.
pub fn random_momdp(nx: usize, ny: usize, na: usize, no: usize, seed: u64) -> MomdpModel {
    let mut rng = rng(seed);
    let mut transition = vec![Vec::new(); nx * na * nx];
    for x in 0..nx {
        for a in 0..na {
            let rows: Vec<Vec<f64>> = (0..ny).map(|_| random_row(nx * ny, &mut rng)).collect();
            for x2 in 0..nx {
                let mut data = vec![0.0; ny * ny];
                for y in 0..ny {
                    data[y * ny..(y + 1) * ny].copy_from_slice(&rows[y][x2 * ny..(x2 + 1) * ny]);
                }
                transition[(x * na + a) * nx + x2] = data;
            }
        }
    }
    let observation: Vec<f64> = (0..nx * ny * na).flat_map(|_| random_row(no, &mut rng)).collect();
    let reward = (0..nx * na * nx)
        .map(|_| RewardKernel::Dense((0..ny * ny).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    let belief = random_row(ny, &mut rng);
    MomdpModel::new(MomdpParts {
        num_observed: nx,
        num_hidden: ny,
        num_actions: na,
        num_observations: no,
        discount: 0.9,
        transition: transition.into_iter().map(HiddenKernel::Dense).collect(),
        observation,
        reward,
        initial_observed: rng.random_range(0..nx),
        initial_hidden_belief: belief,
    })
    .expect("random model is valid")
}

/// Random point on the simplex.
pub fn random_belief<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|e| *e /= s);
    v
}

/// Known-parameter Tiger with the given listening error.
pub fn tiger_known(error: f64) -> MomdpModel {
    let (_, pomdp) = build_tiger(&TigerSpec::symmetric(error));
    MomdpModel::from_flat_pomdp(&pomdp)
}

/// Tiger value at `P(tiger left) = p` by value iteration on a uniform grid
/// over the 1-simplex with linear interpolation between grid points.
pub fn tiger_grid_oracle(error: f64, gamma: f64, step: f64) -> impl Fn(f64) -> f64 {
    let n = (1.0 / step).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let interp = move |v: &[f64], p: f64| {
        let t = p * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let w = t - i as f64;
        v[i] * (1.0 - w) + v[i + 1] * w
    };
    let mut v = vec![0.0; n + 1];
    loop {
        let reset = interp(&v, 0.5);
        let next: Vec<f64> = grid
            .iter()
            .map(|&p| {
                // hear-left has probability (1−ε) when the tiger is left
                let hl = p * (1.0 - error) + (1.0 - p) * error;
                let hr = 1.0 - hl;
                let mut listen = -1.0;
                if hl > 0.0 {
                    listen += gamma * hl * interp(&v, p * (1.0 - error) / hl);
                }
                if hr > 0.0 {
                    listen += gamma * hr * interp(&v, p * error / hr);
                }
                let open_left = p * -100.0 + (1.0 - p) * 10.0 + gamma * reset;
                let open_right = p * 10.0 + (1.0 - p) * -100.0 + gamma * reset;
                listen.max(open_left).max(open_right)
            })
            .collect();
        let residual = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if residual < 1e-10 {
            break;
        }
    }
    move |p| interp(&v, p)
}

/// Exhaustive one-step backup value at `(x, b)`: for each action, pick the
/// best lower-bound vector separately for every `(x', o)`.
pub fn brute_force_backup(m: &MomdpModel, lower: &LowerBound, x: usize, b: &[f64]) -> f64 {
    let (nx, ny, na, no) = m.dims();
    let mut best = f64::NEG_INFINITY;
    for a in 0..na {
        let mut q = 0.0;
        for y in 0..ny {
            for x2 in 0..nx {
                for y2 in 0..ny {
                    q += b[y] * m.transition(x, y, a, x2, y2) * m.reward(x, y, a, x2, y2);
                }
            }
        }
        for x2 in 0..nx {
            for o in 0..no {
                let mut choice = f64::NEG_INFINITY;
                for alpha in lower.alphas(x2) {
                    let mut v = 0.0;
                    for y in 0..ny {
                        for y2 in 0..ny {
                            v += b[y] * m.transition(x, y, a, x2, y2) * m.observation(x2, y2, a, o) * alpha.values[y2];
                        }
                    }
                    choice = choice.max(v);
                }
                if choice.is_finite() {
                    q += m.discount() * choice;
                }
            }
        }
        best = best.max(q);
    }
    best
}
