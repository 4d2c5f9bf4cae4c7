//! Alpha-vector lower bound and sawtooth upper bound, both indexed by the
//! observed component.

use serde::{Deserialize, Serialize};

/// Tolerance used when comparing alpha values for tie-breaking.
const TIE: f64 = 1e-10;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub observed_state: usize,
    pub action: usize,
    /// Value over the hidden component.
    pub values: Vec<f64>,
}

impl AlphaVector {
    pub fn value(&self, belief: &[f64]) -> f64 {
        dot(&self.values, belief)
    }

    /// `self ≥ other` in every entry.
    fn dominates(&self, other: &AlphaVector) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a >= b)
    }
}

/// Piecewise-linear convex lower bound: `L(x, b) = max_α ⟨α, b⟩` over the
/// vectors stored for `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub num_hidden: usize,
    sets: Vec<Vec<AlphaVector>>,
}

impl LowerBound {
    pub fn new(num_observed: usize, num_hidden: usize) -> Self {
        Self {
            num_hidden,
            sets: vec![Vec::new(); num_observed],
        }
    }

    pub fn num_observed(&self) -> usize {
        self.sets.len()
    }

    pub fn alphas(&self, x: usize) -> &[AlphaVector] {
        &self.sets[x]
    }

    /// Total number of stored vectors.
    pub fn len(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &AlphaVector> {
        self.sets.iter().flatten()
    }

    pub fn value(&self, x: usize, belief: &[f64]) -> f64 {
        self.sets[x]
            .iter()
            .map(|a| a.value(belief))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the maximizing vector at `x`; ties go to the lowest action and
    /// then to the earliest inserted vector. Works for unnormalized weights.
    pub fn best(&self, x: usize, belief: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, a) in self.sets[x].iter().enumerate() {
            let v = a.value(belief);
            best = match best {
                None => Some((i, v)),
                Some((j, bv)) => {
                    let scale = TIE * (1.0 + bv.abs());
                    if v > bv + scale || ((v - bv).abs() <= scale && a.action < self.sets[x][j].action) {
                        Some((i, v))
                    } else {
                        best
                    }
                }
            };
        }
        best
    }

    /// Action of the maximizing vector, or 0 if `x` has none.
    pub fn best_action(&self, x: usize, belief: &[f64]) -> usize {
        self.best(x, belief).map_or(0, |(i, _)| self.sets[x][i].action)
    }

    /// Adds `alpha` unless an existing vector dominates it, dropping the
    /// vectors it dominates. Returns whether it was kept.
    pub fn insert(&mut self, alpha: AlphaVector) -> bool {
        let set = &mut self.sets[alpha.observed_state];
        if set.iter().any(|a| a.dominates(&alpha)) {
            return false;
        }
        set.retain(|a| !alpha.dominates(a));
        set.push(alpha);
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct UpperPoint {
    /// Support of the belief as `(y, b(y))` pairs.
    support: Vec<(usize, f64)>,
    value: f64,
    /// `value − ⟨b, corners⟩`, never positive.
    excess: f64,
}

/// Sawtooth upper bound: corner values per `(x, y)` plus interior points.
///
/// `U(x, b) = min(⟨b, c_x⟩, min_p ⟨b, c_x⟩ + ρ_p(b) (v_p − ⟨b_p, c_x⟩))` with
/// `ρ_p(b) = min_{y ∈ supp b_p} b(y) / b_p(y)`.
///
/// When the hidden component splits into blocks that never exchange mass, an
/// upper bound per block can be attached: revealing the block index can only
/// help, so `Σ_k U_k(x, b restricted to block k)` is also an upper bound and
/// the reported value is the smaller of the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    corners: Vec<Vec<f64>>,
    points: Vec<Vec<UpperPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<BlockBound>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BlockBound {
    size: usize,
    parts: Vec<UpperBound>,
}

impl UpperBound {
    pub fn new(corners: Vec<Vec<f64>>) -> Self {
        let n = corners.len();
        Self {
            corners,
            points: vec![Vec::new(); n],
            blocks: None,
        }
    }

    /// Attaches per-block bounds; block `k` covers hidden values `k·size..(k+1)·size`.
    pub fn with_blocks(mut self, size: usize, parts: Vec<UpperBound>) -> Self {
        self.blocks = Some(BlockBound { size, parts });
        self
    }

    /// Sum of the per-block bounds; a sawtooth is positively homogeneous, so
    /// each block is evaluated on its unnormalized slice.
    fn block_value(&self, x: usize, belief: &[f64]) -> Option<f64> {
        let b = self.blocks.as_ref()?;
        Some(
            belief
                .chunks(b.size)
                .zip(&b.parts)
                .filter(|(c, _)| c.iter().any(|&p| p > 0.0))
                .map(|(c, u)| u.value(x, c))
                .sum(),
        )
    }

    pub fn corners(&self, x: usize) -> &[f64] {
        &self.corners[x]
    }

    /// Number of interior points over all `x`.
    pub fn num_points(&self) -> usize {
        self.points.iter().map(Vec::len).sum()
    }

    pub fn value(&self, x: usize, belief: &[f64]) -> f64 {
        let saw = self.sawtooth(x, belief);
        match self.block_value(x, belief) {
            Some(v) if v < saw => v,
            _ => saw,
        }
    }

    fn sawtooth(&self, x: usize, belief: &[f64]) -> f64 {
        let base = dot(belief, &self.corners[x]);
        let mut best = base;
        for p in &self.points[x] {
            let mut ratio = f64::INFINITY;
            for &(y, q) in &p.support {
                let r = belief[y] / q;
                if r < ratio {
                    ratio = r;
                    if ratio == 0.0 {
                        break;
                    }
                }
            }
            let v = base + ratio * p.excess;
            if v < best {
                best = v;
            }
        }
        best
    }

    /// Records `U(x, b) ≤ value` and drops interior points the new one
    /// makes redundant. Returns whether the bound changed.
    pub fn insert(&mut self, x: usize, belief: &[f64], value: f64) -> bool {
        let base = dot(belief, &self.corners[x]);
        let excess = value - base;
        if excess >= 0.0 || value >= self.sawtooth(x, belief) - 1e-12 * (1.0 + value.abs()) {
            return false;
        }
        let support: Vec<(usize, f64)> = belief
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > 0.0)
            .map(|(y, &q)| (y, q))
            .collect();
        let corners = &self.corners[x];
        let mut dense = vec![0.0; corners.len()];
        self.points[x].retain(|q| {
            for &(y, v) in &q.support {
                dense[y] = v;
            }
            let ratio = support.iter().map(|&(y, p)| dense[y] / p).fold(f64::INFINITY, f64::min);
            let implied = (q.value - q.excess) + ratio * excess;
            for &(y, _) in &q.support {
                dense[y] = 0.0;
            }
            implied > q.value + 1e-12 * (1.0 + q.value.abs())
        });
        self.points[x].push(UpperPoint { support, value, excess });
        true
    }
}
