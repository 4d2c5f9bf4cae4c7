//! Hidden-block decomposition.
//!
//! When every kernel is block diagonal with one common block size, hidden
//! mass never leaves its block and each block is a MOMDP of its own.

use crate::model::{HiddenKernel, MomdpModel, MomdpParts, RewardKernel};

/// Common block size of all nonzero kernels, if it splits `Y` into at least
/// two blocks of more than one value.
pub(crate) fn common_block_size(m: &MomdpModel) -> Option<usize> {
    let ny = m.num_hidden();
    let mut size = None;
    for k in &m.parts().transition {
        match k {
            HiddenKernel::Zero => {}
            HiddenKernel::BlockDiagonal { size: s, .. } => match size {
                None => size = Some(*s),
                Some(t) if t == *s => {}
                Some(_) => return None,
            },
            HiddenKernel::Dense(_) => return None,
        }
    }
    size.filter(|&s| s > 1 && s < ny && ny % s == 0)
}

/// Restriction of `m` to hidden values `block·size..(block+1)·size`.
/// The initial belief is the normalized slice, or uniform when it is empty.
pub(crate) fn block_model(m: &MomdpModel, block: usize, size: usize) -> MomdpModel {
    let p = m.parts();
    let (ny, na, no) = (p.num_hidden, p.num_actions, p.num_observations);
    let lo = block * size;
    let transition = p
        .transition
        .iter()
        .map(|k| match k {
            HiddenKernel::Zero => HiddenKernel::Zero,
            HiddenKernel::BlockDiagonal { data, .. } => {
                let d = data[block * size * size..(block + 1) * size * size].to_vec();
                if d.iter().all(|&v| v == 0.0) {
                    HiddenKernel::Zero
                } else {
                    HiddenKernel::BlockDiagonal { size, data: d }
                }
            }
            HiddenKernel::Dense(_) => unreachable!("dense kernels are not block diagonal"),
        })
        .collect();
    let reward = p
        .reward
        .iter()
        .map(|r| match r {
            RewardKernel::Constant(c) => RewardKernel::Constant(*c),
            RewardKernel::Tiled { period, values } if size % period == 0 => RewardKernel::Tiled {
                period: *period,
                values: values.clone(),
            },
            other => RewardKernel::Dense(
                (0..size)
                    .flat_map(|y| (0..size).map(move |y2| (y, y2)))
                    .map(|(y, y2)| other.get(lo + y, lo + y2, ny))
                    .collect(),
            ),
        })
        .collect();
    let mut observation = Vec::with_capacity(p.num_observed * size * na * no);
    for x2 in 0..p.num_observed {
        let row = (x2 * ny + lo) * na * no;
        observation.extend_from_slice(&p.observation[row..row + size * na * no]);
    }
    let slice = &p.initial_hidden_belief[lo..lo + size];
    let mass: f64 = slice.iter().sum();
    let initial_hidden_belief = if mass > 0.0 {
        slice.iter().map(|v| v / mass).collect()
    } else {
        vec![1.0 / size as f64; size]
    };
    MomdpModel::from_parts_unchecked(MomdpParts {
        num_observed: p.num_observed,
        num_hidden: size,
        num_actions: na,
        num_observations: no,
        discount: p.discount,
        transition,
        observation,
        reward,
        initial_observed: p.initial_observed,
        initial_hidden_belief,
    })
}
