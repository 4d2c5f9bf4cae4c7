//! JSON model documents. The grammar is documented in `docs/model-format.md`.

use serde::{Deserialize, Serialize};

use super::{renormalize, FormatError, ParsedModel, PARSE_TOLERANCE};
use crate::model::momdp::{HiddenKernel, MomdpModel, MomdpParts, RewardKernel};
use crate::model::{DiscreteMdp, DiscretePomdp};

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum Document {
    Mdp(FlatDoc),
    Pomdp(FlatDoc),
    Momdp(MomdpDoc),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatDoc {
    states: usize,
    actions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    observations: Option<usize>,
    discount: f64,
    /// `[s][a][s']`
    transition: Vec<Vec<Vec<f64>>>,
    /// `[s][a][s']`
    reward: Vec<Vec<Vec<f64>>>,
    /// `[s'][a][o]`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    observation: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_belief: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MomdpDoc {
    observed: usize,
    hidden: usize,
    actions: usize,
    observations: usize,
    discount: f64,
    /// `[x][a][x']`, each `null` or a kernel over `(y, y')`
    transition: Vec<Vec<Vec<Option<KernelDoc>>>>,
    /// `[x'][y'][a][o]`
    observation: Vec<Vec<Vec<Vec<f64>>>>,
    /// `[x][a][x']`
    reward: Vec<Vec<Vec<RewardDoc>>>,
    initial_observed: usize,
    initial_hidden_belief: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum KernelDoc {
    Dense(Vec<Vec<f64>>),
    Blocks { block_size: usize, blocks: Vec<Vec<Vec<f64>>> },
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RewardDoc {
    Constant(f64),
    Dense(Vec<Vec<f64>>),
    Tiled { period: usize, values: Vec<Vec<f64>> },
}

pub(super) fn parse(text: &str) -> Result<ParsedModel, FormatError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| FormatError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    match doc {
        Document::Mdp(d) => {
            if d.observation.is_some() || d.observations.is_some() {
                return Err(FormatError::Semantic("an mdp document cannot carry observations".into()));
            }
            Ok(ParsedModel::Mdp(flat_mdp(&d)?))
        }
        Document::Pomdp(d) => {
            let mdp = flat_mdp(&d)?;
            let no = d
                .observations
                .ok_or_else(|| FormatError::Semantic("pomdp document is missing `observations`".into()))?;
            let z = d
                .observation
                .as_ref()
                .ok_or_else(|| FormatError::Semantic("pomdp document is missing the `observation` tensor".into()))?;
            let mut observation = flatten3(z, d.states, d.actions, no, "observation")?;
            for (i, row) in observation.chunks_mut(no).enumerate() {
                renormalize(row, "observation", || {
                    format!("(s'={},a={})", i / d.actions, i % d.actions)
                })?;
            }
            let mut initial_belief = match &d.initial_belief {
                Some(b) if b.len() == d.states => b.clone(),
                Some(b) => {
                    return Err(FormatError::Semantic(format!(
                        "initial_belief has {} entries, expected {}",
                        b.len(),
                        d.states
                    )))
                }
                None => vec![1.0 / d.states as f64; d.states],
            };
            renormalize(&mut initial_belief, "initial_belief", String::new)?;
            let pomdp = DiscretePomdp {
                mdp,
                num_observations: no,
                observation,
                initial_belief,
            };
            super::validated(ParsedModel::Pomdp(pomdp))
        }
        Document::Momdp(d) => momdp(d),
    }
}

fn flat_mdp(d: &FlatDoc) -> Result<DiscreteMdp, FormatError> {
    let mut transition = flatten3(&d.transition, d.states, d.actions, d.states, "transition")?;
    let reward = flatten3(&d.reward, d.states, d.actions, d.states, "reward")?;
    for (i, row) in transition.chunks_mut(d.states).enumerate() {
        renormalize(row, "transition", || format!("(s={},a={})", i / d.actions, i % d.actions))?;
    }
    let mdp = DiscreteMdp {
        num_states: d.states,
        num_actions: d.actions,
        transition,
        reward,
        discount: d.discount,
    };
    match super::validated(ParsedModel::Mdp(mdp))? {
        ParsedModel::Mdp(m) => Ok(m),
        _ => unreachable!(),
    }
}

fn flatten3(t: &[Vec<Vec<f64>>], d0: usize, d1: usize, d2: usize, name: &str) -> Result<Vec<f64>, FormatError> {
    let mismatch = || FormatError::Semantic(format!("`{name}` must have shape [{d0}][{d1}][{d2}]"));
    if t.len() != d0 {
        return Err(mismatch());
    }
    let mut out = Vec::with_capacity(d0 * d1 * d2);
    for m in t {
        if m.len() != d1 {
            return Err(mismatch());
        }
        for row in m {
            if row.len() != d2 {
                return Err(mismatch());
            }
            out.extend_from_slice(row);
        }
    }
    Ok(out)
}

fn momdp(d: MomdpDoc) -> Result<ParsedModel, FormatError> {
    let (nx, ny, na, no) = (d.observed, d.hidden, d.actions, d.observations);
    let shape = |name: &str, what: &str| FormatError::Semantic(format!("`{name}` must have shape {what}"));
    if d.transition.len() != nx || d.transition.iter().any(|m| m.len() != na || m.iter().any(|r| r.len() != nx)) {
        return Err(shape("transition", &format!("[{nx}][{na}][{nx}]")));
    }
    if d.reward.len() != nx || d.reward.iter().any(|m| m.len() != na || m.iter().any(|r| r.len() != nx)) {
        return Err(shape("reward", &format!("[{nx}][{na}][{nx}]")));
    }
    let mut transition = Vec::with_capacity(nx * na * nx);
    for k in d.transition.into_iter().flatten().flatten() {
        transition.push(match k {
            None => HiddenKernel::Zero,
            Some(KernelDoc::Dense(rows)) => {
                if rows.len() != ny || rows.iter().any(|r| r.len() != ny) {
                    return Err(shape("transition kernel", &format!("[{ny}][{ny}]")));
                }
                HiddenKernel::Dense(rows.concat())
            }
            Some(KernelDoc::Blocks { block_size, blocks }) => {
                if block_size == 0
                    || blocks.len() * block_size != ny
                    || blocks.iter().any(|b| b.len() != block_size || b.iter().any(|r| r.len() != block_size))
                {
                    return Err(shape("transition kernel blocks", &format!("[{ny}/size][size][size]")));
                }
                HiddenKernel::BlockDiagonal {
                    size: block_size,
                    data: blocks.concat().concat(),
                }
            }
        });
    }
    let mut reward = Vec::with_capacity(nx * na * nx);
    for r in d.reward.into_iter().flatten().flatten() {
        reward.push(match r {
            RewardDoc::Constant(c) => RewardKernel::Constant(c),
            RewardDoc::Dense(rows) => {
                if rows.len() != ny || rows.iter().any(|r| r.len() != ny) {
                    return Err(shape("reward kernel", &format!("[{ny}][{ny}]")));
                }
                RewardKernel::Dense(rows.concat())
            }
            RewardDoc::Tiled { period, values } => {
                if values.len() != period || values.iter().any(|r| r.len() != period) {
                    return Err(shape("tiled reward", &format!("[{period}][{period}]")));
                }
                RewardKernel::Tiled {
                    period,
                    values: values.concat(),
                }
            }
        });
    }
    if d.observation.len() != nx
        || d.observation.iter().any(|m| m.len() != ny || m.iter().any(|r| r.len() != na || r.iter().any(|q| q.len() != no)))
    {
        return Err(shape("observation", &format!("[{nx}][{ny}][{na}][{no}]")));
    }
    let mut observation: Vec<f64> = d.observation.into_iter().flatten().flatten().flatten().collect();
    for (i, row) in observation.chunks_mut(no).enumerate() {
        renormalize(row, "observation", || format!("(x'={},y'={},a={})", i / (ny * na), (i / na) % ny, i % na))?;
    }
    let mut initial_hidden_belief = d.initial_hidden_belief;
    if initial_hidden_belief.len() != ny {
        return Err(shape("initial_hidden_belief", &format!("[{ny}]")));
    }
    renormalize(&mut initial_hidden_belief, "initial_hidden_belief", String::new)?;

    // Transition rows span several kernels: row (x, y, a) collects mass over every x'.
    for x in 0..nx {
        for a in 0..na {
            for y in 0..ny {
                let mut sum = 0.0;
                for x2 in 0..nx {
                    transition[(x * na + a) * nx + x2].for_each_in_row(y, ny, |_, t| sum += t);
                }
                if (sum - 1.0).abs() > PARSE_TOLERANCE {
                    return Err(FormatError::Semantic(format!(
                        "transition row (x={x},y={y},a={a}) sums to {sum}"
                    )));
                }
                if sum != 1.0 {
                    for x2 in 0..nx {
                        scale_row(&mut transition[(x * na + a) * nx + x2], y, ny, 1.0 / sum);
                    }
                }
            }
        }
    }

    let parts = MomdpParts {
        num_observed: nx,
        num_hidden: ny,
        num_actions: na,
        num_observations: no,
        discount: d.discount,
        transition,
        observation,
        reward,
        initial_observed: d.initial_observed,
        initial_hidden_belief,
    };
    super::validated(ParsedModel::Momdp(MomdpModel::from_parts_unchecked(parts)))
}

fn scale_row(k: &mut HiddenKernel, y: usize, ny: usize, factor: f64) {
    match k {
        HiddenKernel::Zero => {}
        HiddenKernel::BlockDiagonal { size, data } => {
            let s = *size;
            let start = (y / s) * s * s + (y % s) * s;
            data[start..start + s].iter_mut().for_each(|v| *v *= factor);
        }
        HiddenKernel::Dense(data) => data[y * ny..(y + 1) * ny].iter_mut().for_each(|v| *v *= factor),
    }
}

fn nest3(v: &[f64], d1: usize, d2: usize) -> Vec<Vec<Vec<f64>>> {
    v.chunks(d1 * d2)
        .map(|m| m.chunks(d2).map(|r| r.to_vec()).collect())
        .collect()
}

fn flat_doc(mdp: &DiscreteMdp) -> FlatDoc {
    FlatDoc {
        states: mdp.num_states,
        actions: mdp.num_actions,
        observations: None,
        discount: mdp.discount,
        transition: nest3(&mdp.transition, mdp.num_actions, mdp.num_states),
        reward: nest3(&mdp.reward, mdp.num_actions, mdp.num_states),
        observation: None,
        initial_belief: None,
    }
}

pub(super) fn serialize(model: &ParsedModel) -> String {
    let doc = match model {
        ParsedModel::Mdp(m) => Document::Mdp(flat_doc(m)),
        ParsedModel::Pomdp(p) => {
            let mut d = flat_doc(&p.mdp);
            d.observations = Some(p.num_observations);
            d.observation = Some(nest3(&p.observation, p.num_actions(), p.num_observations));
            d.initial_belief = Some(p.initial_belief.clone());
            Document::Pomdp(d)
        }
        ParsedModel::Momdp(m) => {
            let p = m.parts();
            let (nx, ny, na, no) = m.dims();
            let kernel = |k: &HiddenKernel| match k {
                HiddenKernel::Zero => None,
                HiddenKernel::Dense(d) => Some(KernelDoc::Dense(d.chunks(ny).map(|r| r.to_vec()).collect())),
                HiddenKernel::BlockDiagonal { size, data } => Some(KernelDoc::Blocks {
                    block_size: *size,
                    blocks: nest3(data, *size, *size),
                }),
            };
            let reward = |r: &RewardKernel| match r {
                RewardKernel::Constant(c) => RewardDoc::Constant(*c),
                RewardKernel::Dense(d) => RewardDoc::Dense(d.chunks(ny).map(|r| r.to_vec()).collect()),
                RewardKernel::Tiled { period, values } => RewardDoc::Tiled {
                    period: *period,
                    values: values.chunks(*period).map(|r| r.to_vec()).collect(),
                },
            };
            let grid = |i: usize| (i / (na * nx), (i / nx) % na);
            let mut transition = vec![vec![Vec::with_capacity(nx); na]; nx];
            for (i, k) in p.transition.iter().enumerate() {
                let (x, a) = grid(i);
                transition[x][a].push(kernel(k));
            }
            let mut rewards = vec![vec![Vec::with_capacity(nx); na]; nx];
            for (i, r) in p.reward.iter().enumerate() {
                let (x, a) = grid(i);
                rewards[x][a].push(reward(r));
            }
            let observation = p
                .observation
                .chunks(ny * na * no)
                .map(|xs| nest3(xs, na, no))
                .collect();
            Document::Momdp(MomdpDoc {
                observed: nx,
                hidden: ny,
                actions: na,
                observations: no,
                discount: p.discount,
                transition,
                observation,
                reward: rewards,
                initial_observed: p.initial_observed,
                initial_hidden_belief: p.initial_hidden_belief.clone(),
            })
        }
    };
    serde_json::to_string_pretty(&doc).expect("model documents always serialize")
}
