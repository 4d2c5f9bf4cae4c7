//! Mixed-observability MDPs: a fully observed component `x` and a hidden
//! component `y`.
//!
//! Transitions and rewards are stored per `(x, a, x')` as kernels over
//! `(y, y')`. Models built from sampled hypotheses never move probability
//! between hypotheses, so their kernels are block diagonal and stay small even
//! for a thousand hypotheses. Tensor layouts:
//!
//! - `transition[(x·A + a)·X + x']` is a `|Y|×|Y|` kernel,
//! - `observation[((x'·|Y| + y')·A + a)·|O| + o]`,
//! - `reward[(x·A + a)·X + x']` is a `|Y|×|Y|` reward kernel.

use serde::{Deserialize, Serialize};

use super::belief::{check_distribution, BeliefError, HiddenBelief};
use super::mdp::DiscreteMdp;
use super::pomdp::DiscretePomdp;
use super::validate::{Checker, Validate, Violation, ROW_SUM_TOLERANCE};

/// Hidden-to-hidden transition kernel for one `(x, a, x')` triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenKernel {
    /// No mass reaches `x'`.
    Zero,
    /// `|Y| / size` diagonal blocks, each `size × size`, concatenated row-major.
    BlockDiagonal { size: usize, data: Vec<f64> },
    /// Full `|Y| × |Y|` row-major matrix.
    Dense(Vec<f64>),
}

impl HiddenKernel {
    /// Diagonal kernel: `y` stays `y` with probability `diag[y]`.
    pub fn diagonal(diag: Vec<f64>) -> Self {
        if diag.iter().all(|&p| p == 0.0) {
            HiddenKernel::Zero
        } else {
            HiddenKernel::BlockDiagonal { size: 1, data: diag }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            HiddenKernel::Zero => true,
            HiddenKernel::BlockDiagonal { data, .. } | HiddenKernel::Dense(data) => {
                data.iter().all(|&p| p == 0.0)
            }
        }
    }

    pub fn get(&self, y: usize, y2: usize, ny: usize) -> f64 {
        match self {
            HiddenKernel::Zero => 0.0,
            HiddenKernel::BlockDiagonal { size, data } => {
                if y / size != y2 / size {
                    0.0
                } else {
                    let blk = y / size;
                    data[blk * size * size + (y % size) * size + y2 % size]
                }
            }
            HiddenKernel::Dense(data) => data[y * ny + y2],
        }
    }

    /// Calls `f(y', p)` for every potentially nonzero entry of row `y`.
    pub fn for_each_in_row(&self, y: usize, ny: usize, mut f: impl FnMut(usize, f64)) {
        match self {
            HiddenKernel::Zero => {}
            HiddenKernel::BlockDiagonal { size, data } => {
                let blk = y / size;
                let base = blk * size;
                let row = &data[blk * size * size + (y % size) * size..][..*size];
                for (j, &p) in row.iter().enumerate() {
                    f(base + j, p);
                }
            }
            HiddenKernel::Dense(data) => {
                for (y2, &p) in data[y * ny..(y + 1) * ny].iter().enumerate() {
                    f(y2, p);
                }
            }
        }
    }

    /// `out[y'] += Σ_y b[y] K[y][y']`.
    pub fn propagate_add(&self, b: &[f64], out: &mut [f64]) {
        match self {
            HiddenKernel::Zero => {}
            HiddenKernel::BlockDiagonal { size, data } => {
                let size = *size;
                if size == 1 {
                    for ((o, &p), &k) in out.iter_mut().zip(b).zip(data) {
                        *o += p * k;
                    }
                    return;
                }
                for (blk, (bb, ob)) in b.chunks(size).zip(out.chunks_mut(size)).enumerate() {
                    let m = &data[blk * size * size..(blk + 1) * size * size];
                    for (i, &p) in bb.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        for (o, &k) in ob.iter_mut().zip(&m[i * size..(i + 1) * size]) {
                            *o += p * k;
                        }
                    }
                }
            }
            HiddenKernel::Dense(data) => {
                let ny = b.len();
                for (y, &p) in b.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    for (o, &k) in out.iter_mut().zip(&data[y * ny..(y + 1) * ny]) {
                        *o += p * k;
                    }
                }
            }
        }
    }

    /// `out[y] += scale · Σ_{y'} K[y][y'] v[y']`.
    pub fn back_project_add(&self, v: &[f64], scale: f64, out: &mut [f64]) {
        match self {
            HiddenKernel::Zero => {}
            HiddenKernel::BlockDiagonal { size, data } => {
                let size = *size;
                if size == 1 {
                    for ((o, &x), &k) in out.iter_mut().zip(v).zip(data) {
                        *o += scale * k * x;
                    }
                    return;
                }
                for (blk, (vb, ob)) in v.chunks(size).zip(out.chunks_mut(size)).enumerate() {
                    let m = &data[blk * size * size..(blk + 1) * size * size];
                    for (i, o) in ob.iter_mut().enumerate() {
                        let dot: f64 = m[i * size..(i + 1) * size].iter().zip(vb).map(|(k, x)| k * x).sum();
                        *o += scale * dot;
                    }
                }
            }
            HiddenKernel::Dense(data) => {
                let ny = v.len();
                for (y, o) in out.iter_mut().enumerate() {
                    let dot: f64 = data[y * ny..(y + 1) * ny].iter().zip(v).map(|(k, x)| k * x).sum();
                    *o += scale * dot;
                }
            }
        }
    }

    fn check_shape(&self, ny: usize) -> Result<(), String> {
        match self {
            HiddenKernel::Zero => Ok(()),
            HiddenKernel::BlockDiagonal { size, data } => {
                if *size == 0 || ny % size != 0 {
                    Err(format!("block size {size} does not divide {ny}"))
                } else if data.len() != ny * size {
                    Err(format!("block data has {} entries, expected {}", data.len(), ny * size))
                } else {
                    Ok(())
                }
            }
            HiddenKernel::Dense(data) => {
                if data.len() != ny * ny {
                    Err(format!("dense kernel has {} entries, expected {}", data.len(), ny * ny))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            HiddenKernel::Zero => &[],
            HiddenKernel::BlockDiagonal { data, .. } | HiddenKernel::Dense(data) => data,
        }
    }
}

/// Reward as a function of `(y, y')` for one `(x, a, x')` triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKernel {
    Constant(f64),
    /// `R[y][y'] = values[(y mod p)·p + (y' mod p)]`; used when the hidden
    /// index packs a world state with period `p`.
    Tiled { period: usize, values: Vec<f64> },
    Dense(Vec<f64>),
}

impl RewardKernel {
    #[inline]
    pub fn get(&self, y: usize, y2: usize, ny: usize) -> f64 {
        match self {
            RewardKernel::Constant(c) => *c,
            RewardKernel::Tiled { period, values } => values[(y % period) * period + y2 % period],
            RewardKernel::Dense(v) => v[y * ny + y2],
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            RewardKernel::Constant(c) => std::slice::from_ref(c),
            RewardKernel::Tiled { values, .. } | RewardKernel::Dense(values) => values,
        }
    }

    fn check_shape(&self, ny: usize) -> Result<(), String> {
        match self {
            RewardKernel::Constant(_) => Ok(()),
            RewardKernel::Tiled { period, values } => {
                if *period == 0 || ny % period != 0 || values.len() != period * period {
                    Err(format!("tiled reward with period {period} does not fit {ny} hidden values"))
                } else {
                    Ok(())
                }
            }
            RewardKernel::Dense(v) => {
                if v.len() != ny * ny {
                    Err(format!("dense reward has {} entries, expected {}", v.len(), ny * ny))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Raw tensors of a [`MomdpModel`]; also its serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomdpParts {
    pub num_observed: usize,
    pub num_hidden: usize,
    pub num_actions: usize,
    pub num_observations: usize,
    pub discount: f64,
    pub transition: Vec<HiddenKernel>,
    pub observation: Vec<f64>,
    pub reward: Vec<RewardKernel>,
    pub initial_observed: usize,
    pub initial_hidden_belief: Vec<f64>,
}

/// A discrete MOMDP plus lookup tables derived from its tensors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "MomdpParts", into = "MomdpParts")]
pub struct MomdpModel {
    parts: MomdpParts,
    /// `[x][a][y]` expected immediate reward.
    expected_reward: Vec<f64>,
    /// `[x][a]` observed successors with a nonzero kernel.
    successors: Vec<Vec<usize>>,
    /// `[x'][a]` observations with nonzero probability for some `y'`.
    obs_support: Vec<Vec<usize>>,
    /// `[x'][a][o][y']` observation likelihoods, contiguous in `y'`.
    z_columns: Vec<f64>,
    r_max: f64,
}

impl PartialEq for MomdpModel {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl From<MomdpParts> for MomdpModel {
    fn from(parts: MomdpParts) -> Self {
        Self::from_parts_unchecked(parts)
    }
}

impl From<MomdpModel> for MomdpParts {
    fn from(m: MomdpModel) -> Self {
        m.parts
    }
}

impl MomdpModel {
    /// Builds and validates.
    pub fn new(parts: MomdpParts) -> Result<Self, Vec<Violation>> {
        let m = Self::from_parts_unchecked(parts);
        let v = m.violations();
        if v.is_empty() {
            Ok(m)
        } else {
            Err(v)
        }
    }

    /// Builds without validating. Lookup tables are only populated when the
    /// tensor shapes are consistent, so a malformed model can still be
    /// inspected with [`Validate::violations`].
    pub fn from_parts_unchecked(parts: MomdpParts) -> Self {
        let mut m = MomdpModel {
            parts,
            expected_reward: Vec::new(),
            successors: Vec::new(),
            obs_support: Vec::new(),
            z_columns: Vec::new(),
            r_max: 0.0,
        };
        if m.shape_violations().is_empty() {
            m.build_tables();
        }
        m
    }

    fn build_tables(&mut self) {
        let (nx, ny, na, no) = self.dims();
        let p = &self.parts;
        self.r_max = p
            .reward
            .iter()
            .flat_map(|r| r.values().iter())
            .fold(0.0f64, |m, r| m.max(r.abs()));

        self.successors = (0..nx * na)
            .map(|xa| {
                (0..nx)
                    .filter(|&x2| !p.transition[xa * nx + x2].is_zero())
                    .collect()
            })
            .collect();

        self.z_columns = vec![0.0; nx * na * no * ny];
        for x2 in 0..nx {
            for y2 in 0..ny {
                for a in 0..na {
                    for o in 0..no {
                        let z = p.observation[((x2 * ny + y2) * na + a) * no + o];
                        self.z_columns[((x2 * na + a) * no + o) * ny + y2] = z;
                    }
                }
            }
        }
        self.obs_support = (0..nx * na)
            .map(|x2a| {
                (0..no)
                    .filter(|&o| {
                        self.z_columns[(x2a * no + o) * ny..(x2a * no + o + 1) * ny]
                            .iter()
                            .any(|&z| z > 0.0)
                    })
                    .collect()
            })
            .collect();

        self.expected_reward = vec![0.0; nx * na * ny];
        for x in 0..nx {
            for a in 0..na {
                for x2 in 0..nx {
                    let k = &p.transition[(x * na + a) * nx + x2];
                    let r = &p.reward[(x * na + a) * nx + x2];
                    for y in 0..ny {
                        let mut acc = 0.0;
                        k.for_each_in_row(y, ny, |y2, t| {
                            if t != 0.0 {
                                acc += t * r.get(y, y2, ny);
                            }
                        });
                        self.expected_reward[(x * na + a) * ny + y] += acc;
                    }
                }
            }
        }
    }

    /// `(|X|, |Y|, |A|, |O|)`.
    #[inline]
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        let p = &self.parts;
        (p.num_observed, p.num_hidden, p.num_actions, p.num_observations)
    }

    pub fn parts(&self) -> &MomdpParts {
        &self.parts
    }

    pub fn into_parts(self) -> MomdpParts {
        self.parts
    }

    pub fn num_observed(&self) -> usize {
        self.parts.num_observed
    }

    pub fn num_hidden(&self) -> usize {
        self.parts.num_hidden
    }

    pub fn num_actions(&self) -> usize {
        self.parts.num_actions
    }

    pub fn num_observations(&self) -> usize {
        self.parts.num_observations
    }

    pub fn discount(&self) -> f64 {
        self.parts.discount
    }

    pub fn initial_observed(&self) -> usize {
        self.parts.initial_observed
    }

    pub fn initial_hidden_belief(&self) -> HiddenBelief {
        HiddenBelief::from_normalized_unchecked(self.parts.initial_hidden_belief.clone())
    }

    /// `max |R|` over every stored reward entry.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    #[inline]
    pub fn kernel(&self, x: usize, a: usize, x2: usize) -> &HiddenKernel {
        let (nx, _, na, _) = self.dims();
        &self.parts.transition[(x * na + a) * nx + x2]
    }

    #[inline]
    pub fn reward_kernel(&self, x: usize, a: usize, x2: usize) -> &RewardKernel {
        let (nx, _, na, _) = self.dims();
        &self.parts.reward[(x * na + a) * nx + x2]
    }

    pub fn transition(&self, x: usize, y: usize, a: usize, x2: usize, y2: usize) -> f64 {
        self.kernel(x, a, x2).get(y, y2, self.parts.num_hidden)
    }

    pub fn observation(&self, x2: usize, y2: usize, a: usize, o: usize) -> f64 {
        let (_, ny, na, no) = self.dims();
        self.parts.observation[((x2 * ny + y2) * na + a) * no + o]
    }

    pub fn reward(&self, x: usize, y: usize, a: usize, x2: usize, y2: usize) -> f64 {
        self.reward_kernel(x, a, x2).get(y, y2, self.parts.num_hidden)
    }

    /// Expected immediate reward `r(x, a, ·)` as a vector over `y`.
    #[inline]
    pub fn expected_reward(&self, x: usize, a: usize) -> &[f64] {
        let ny = self.parts.num_hidden;
        let i = (x * self.parts.num_actions + a) * ny;
        &self.expected_reward[i..i + ny]
    }

    /// Observed states reachable from `x` under `a`.
    #[inline]
    pub fn successors(&self, x: usize, a: usize) -> &[usize] {
        &self.successors[x * self.parts.num_actions + a]
    }

    /// Observations possible on arriving in `x2` after `a`.
    #[inline]
    pub fn observation_support(&self, x2: usize, a: usize) -> &[usize] {
        &self.obs_support[x2 * self.parts.num_actions + a]
    }

    /// `Z(x2, ·, a, o)` as a vector over `y'`.
    #[inline]
    pub fn z_column(&self, x2: usize, a: usize, o: usize) -> &[f64] {
        let (_, ny, na, no) = self.dims();
        let i = ((x2 * na + a) * no + o) * ny;
        &self.z_columns[i..i + ny]
    }

    /// Unnormalized successor weights `Z(x2,y',a,o) Σ_y T(x,y,a,x2,y') b(y)`
    /// written into `out`; returns their total.
    pub fn successor_weights(
        &self,
        x: usize,
        belief: &[f64],
        a: usize,
        x2: usize,
        o: usize,
        out: &mut [f64],
    ) -> f64 {
        out.iter_mut().for_each(|v| *v = 0.0);
        self.kernel(x, a, x2).propagate_add(belief, out);
        let mut total = 0.0;
        for (v, z) in out.iter_mut().zip(self.z_column(x2, a, o)) {
            *v *= z;
            total += *v;
        }
        total
    }

    /// Treats every POMDP state as hidden: `|X| = 1`, `Y = S`.
    pub fn from_flat_pomdp(p: &DiscretePomdp) -> Self {
        let (ns, na, no) = (p.num_states(), p.num_actions(), p.num_observations);
        let mut transition = Vec::with_capacity(na);
        let mut reward = Vec::with_capacity(na);
        for a in 0..na {
            let mut t = vec![0.0; ns * ns];
            let mut r = vec![0.0; ns * ns];
            for s in 0..ns {
                for s2 in 0..ns {
                    t[s * ns + s2] = p.mdp.t(s, a, s2);
                    r[s * ns + s2] = p.mdp.r(s, a, s2);
                }
            }
            transition.push(HiddenKernel::Dense(t));
            reward.push(RewardKernel::Dense(r));
        }
        let mut observation = vec![0.0; ns * na * no];
        for s2 in 0..ns {
            for a in 0..na {
                for o in 0..no {
                    observation[(s2 * na + a) * no + o] = p.z(s2, a, o);
                }
            }
        }
        Self::from_parts_unchecked(MomdpParts {
            num_observed: 1,
            num_hidden: ns,
            num_actions: na,
            num_observations: no,
            discount: p.discount(),
            transition,
            observation,
            reward,
            initial_observed: 0,
            initial_hidden_belief: p.initial_belief.clone(),
        })
    }

    /// Treats every MDP state as observed: `X = S`, `|Y| = 1`, one dummy
    /// observation.
    pub fn from_mdp(mdp: &DiscreteMdp, start: usize) -> Self {
        let (ns, na) = (mdp.num_states, mdp.num_actions);
        let mut transition = Vec::with_capacity(ns * na * ns);
        let mut reward = Vec::with_capacity(ns * na * ns);
        for s in 0..ns {
            for a in 0..na {
                for s2 in 0..ns {
                    let t = mdp.t(s, a, s2);
                    transition.push(if t == 0.0 { HiddenKernel::Zero } else { HiddenKernel::Dense(vec![t]) });
                    reward.push(RewardKernel::Constant(mdp.r(s, a, s2)));
                }
            }
        }
        Self::from_parts_unchecked(MomdpParts {
            num_observed: ns,
            num_hidden: 1,
            num_actions: na,
            num_observations: 1,
            discount: mdp.discount,
            transition,
            observation: vec![1.0; ns * na],
            reward,
            initial_observed: start,
            initial_hidden_belief: vec![1.0],
        })
    }

    /// Flattens `(x, y)` to `s = x·|Y| + y`.
    pub fn to_flat_pomdp(&self) -> DiscretePomdp {
        let (nx, ny, na, no) = self.dims();
        let ns = nx * ny;
        let mut mdp = DiscreteMdp {
            num_states: ns,
            num_actions: na,
            transition: vec![0.0; ns * na * ns],
            reward: vec![0.0; ns * na * ns],
            discount: self.parts.discount,
        };
        for x in 0..nx {
            for a in 0..na {
                for x2 in 0..nx {
                    for y in 0..ny {
                        for y2 in 0..ny {
                            let i = mdp.index(x * ny + y, a, x2 * ny + y2);
                            mdp.transition[i] = self.transition(x, y, a, x2, y2);
                            mdp.reward[i] = self.reward(x, y, a, x2, y2);
                        }
                    }
                }
            }
        }
        let mut observation = vec![0.0; ns * na * no];
        for x2 in 0..nx {
            for y2 in 0..ny {
                for a in 0..na {
                    for o in 0..no {
                        observation[((x2 * ny + y2) * na + a) * no + o] = self.observation(x2, y2, a, o);
                    }
                }
            }
        }
        let mut initial_belief = vec![0.0; ns];
        let x0 = self.parts.initial_observed;
        initial_belief[x0 * ny..(x0 + 1) * ny].copy_from_slice(&self.parts.initial_hidden_belief);
        DiscretePomdp {
            mdp,
            num_observations: no,
            observation,
            initial_belief,
        }
    }

    fn shape_violations(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        let p = &self.parts;
        let (nx, ny, na, no) = (p.num_observed, p.num_hidden, p.num_actions, p.num_observations);
        if nx == 0 || ny == 0 || na == 0 || no == 0 {
            c.push("dimensions", String::new(), "all dimensions must be at least 1".into());
            return c.found;
        }
        let blocks = nx * na * nx;
        if c.length("transition", p.transition.len(), blocks) {
            for (i, k) in p.transition.iter().enumerate() {
                if let Err(e) = k.check_shape(ny) {
                    c.push("transition", block_location(i, nx, na), e);
                }
            }
        }
        if c.length("reward", p.reward.len(), blocks) {
            for (i, r) in p.reward.iter().enumerate() {
                if let Err(e) = r.check_shape(ny) {
                    c.push("reward", block_location(i, nx, na), e);
                }
            }
        }
        c.length("observation", p.observation.len(), nx * ny * na * no);
        c.length("initial_hidden_belief", p.initial_hidden_belief.len(), ny);
        if p.initial_observed >= nx {
            c.push(
                "initial_observed",
                String::new(),
                format!("{} out of range for {nx} observed states", p.initial_observed),
            );
        }
        c.found
    }
}

fn block_location(i: usize, nx: usize, na: usize) -> String {
    let x2 = i % nx;
    let a = (i / nx) % na;
    let x = i / (nx * na);
    format!("(x={x},a={a},x'={x2})")
}

impl Validate for MomdpModel {
    fn violations(&self) -> Vec<Violation> {
        let shape = self.shape_violations();
        if !shape.is_empty() {
            return shape;
        }
        let mut c = Checker::default();
        let p = &self.parts;
        let (nx, ny, na, no) = self.dims();
        c.discount(p.discount);
        for x in 0..nx {
            for a in 0..na {
                for x2 in 0..nx {
                    let k = self.kernel(x, a, x2);
                    if let Some(bad) = k.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
                        c.push("transition", format!("(x={x},a={a},x'={x2})"), format!("entry {bad} is not a probability"));
                    }
                    c.finite("reward", || format!("(x={x},a={a},x'={x2})"), self.reward_kernel(x, a, x2).values());
                }
                for y in 0..ny {
                    let mut sum = 0.0;
                    for x2 in 0..nx {
                        self.kernel(x, a, x2).for_each_in_row(y, ny, |_, t| sum += t);
                    }
                    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                        c.push("transition", format!("(x={x},y={y},a={a})"), format!("row sums to {sum}"));
                    }
                }
            }
        }
        for x2 in 0..nx {
            for y2 in 0..ny {
                for a in 0..na {
                    let start = ((x2 * ny + y2) * na + a) * no;
                    c.stochastic_row(
                        "observation",
                        || format!("(x'={x2},y'={y2},a={a})"),
                        &p.observation[start..start + no],
                    );
                }
            }
        }
        if let Err(e) = check_distribution(&p.initial_hidden_belief) {
            c.push("initial_hidden_belief", String::new(), e.to_string());
        }
        c.found
    }
}

/// Factored Bayes filter over the hidden component:
/// `b'(y') ∝ Σ_y Z(x',y',a,o) T(x,y,a,x',y') b(y)`.
pub fn belief_update_momdp(
    model: &MomdpModel,
    x: usize,
    belief: &HiddenBelief,
    action: usize,
    x_next: usize,
    observation: usize,
) -> Result<HiddenBelief, BeliefError> {
    let ny = model.num_hidden();
    if belief.len() != ny {
        return Err(BeliefError::Dimension {
            got: belief.len(),
            want: ny,
        });
    }
    let mut out = vec![0.0; ny];
    let total = model.successor_weights(x, belief.as_slice(), action, x_next, observation, &mut out);
    if !(total > 0.0) {
        return Err(BeliefError::ImpossibleEvidence { action, observation });
    }
    out.iter_mut().for_each(|v| *v /= total);
    Ok(HiddenBelief::from_normalized_unchecked(out))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::pomdp::belief_update_flat;
    use crate::model::validate::validate_model;
    use proptest::prelude::*;

    /// Random dense MOMDP for property tests.
    pub(crate) fn random_momdp(nx: usize, ny: usize, na: usize, no: usize, seed: u64) -> MomdpModel {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut transition = vec![Vec::new(); nx * na * nx];
        for x in 0..nx {
            for a in 0..na {
                // rows over (x', y') for each y, sparsified a little
                let mut rows = vec![vec![0.0; nx * ny]; ny];
                for row in rows.iter_mut() {
                    for v in row.iter_mut() {
                        *v = if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() };
                    }
                    let j = rng.random_range(0..nx * ny);
                    row[j] += 0.1;
                    let s: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= s);
                }
                for x2 in 0..nx {
                    let mut data = vec![0.0; ny * ny];
                    for y in 0..ny {
                        for y2 in 0..ny {
                            data[y * ny + y2] = rows[y][x2 * ny + y2];
                        }
                    }
                    transition[(x * na + a) * nx + x2] = data;
                }
            }
        }
        let mut observation = vec![0.0; nx * ny * na * no];
        for chunk in observation.chunks_mut(no) {
            for v in chunk.iter_mut() {
                *v = if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() };
            }
            chunk[rng.random_range(0..no)] += 0.1;
            let s: f64 = chunk.iter().sum();
            chunk.iter_mut().for_each(|v| *v /= s);
        }
        let mut b: Vec<f64> = (0..ny).map(|_| rng.random::<f64>() + 0.01).collect();
        let s: f64 = b.iter().sum();
        b.iter_mut().for_each(|v| *v /= s);
        MomdpModel::new(MomdpParts {
            num_observed: nx,
            num_hidden: ny,
            num_actions: na,
            num_observations: no,
            discount: 0.9,
            transition: transition.into_iter().map(HiddenKernel::Dense).collect(),
            observation,
            reward: (0..nx * na * nx)
                .map(|_| RewardKernel::Dense((0..ny * ny).map(|_| rng.random_range(-1.0..1.0)).collect()))
                .collect(),
            initial_observed: rng.random_range(0..nx),
            initial_hidden_belief: b,
        })
        .expect("random model is valid")
    }

    #[test]
    fn flattened_model_is_valid() {
        let m = random_momdp(3, 2, 2, 3, 7);
        validate_model(&m.to_flat_pomdp()).unwrap();
    }

    #[test]
    fn zero_prior_stays_zero() {
        let m = random_momdp(2, 3, 2, 2, 11);
        let b = HiddenBelief::new(vec![0.5, 0.0, 0.5]).unwrap();
        // Block-diagonal kernels keep the hidden index; swap in identity-like hidden dynamics.
        let mut parts = m.into_parts();
        for k in parts.transition.iter_mut() {
            if let HiddenKernel::Dense(d) = k {
                let ny = 3;
                let mut diag = vec![0.0; ny];
                for y in 0..ny {
                    diag[y] = d[y * ny..(y + 1) * ny].iter().sum();
                }
                *k = HiddenKernel::diagonal(diag);
            }
        }
        let m = MomdpModel::new(parts).unwrap();
        for a in 0..2 {
            for &x2 in m.successors(0, a) {
                for &o in m.observation_support(x2, a) {
                    if let Ok(post) = belief_update_momdp(&m, 0, &b, a, x2, o) {
                        assert_eq!(post.as_slice()[1], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn block_kernel_ops_agree_with_dense() {
        let ny = 6;
        let data: Vec<f64> = (0..ny * 2).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let blk = HiddenKernel::BlockDiagonal { size: 2, data };
        let dense = HiddenKernel::Dense(
            (0..ny * ny).map(|i| blk.get(i / ny, i % ny, ny)).collect(),
        );
        let b: Vec<f64> = (0..ny).map(|i| i as f64 + 1.0).collect();
        let (mut o1, mut o2) = (vec![0.0; ny], vec![0.0; ny]);
        blk.propagate_add(&b, &mut o1);
        dense.propagate_add(&b, &mut o2);
        for (p, q) in o1.iter().zip(&o2) {
            assert!((p - q).abs() < 1e-12);
        }
        let (mut o1, mut o2) = (vec![0.0; ny], vec![0.0; ny]);
        blk.back_project_add(&b, 0.5, &mut o1);
        dense.back_project_add(&b, 0.5, &mut o2);
        for (p, q) in o1.iter().zip(&o2) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    /// Flat-filter oracle: marginal over `y` of the flattened POMDP update.
    fn flat_marginal(flat: &DiscretePomdp, ny: usize, x: usize, b: &[f64], a: usize, x2: usize, o: usize) -> Option<Vec<f64>> {
        let mut full = vec![0.0; flat.num_states()];
        full[x * ny..(x + 1) * ny].copy_from_slice(b);
        let post = belief_update_flat(flat, &full, a, o).ok()?;
        // condition on the observed component x2
        let slice = &post[x2 * ny..(x2 + 1) * ny];
        let s: f64 = slice.iter().sum();
        if s <= 0.0 {
            return None;
        }
        Some(slice.iter().map(|v| v / s).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn factored_filter_matches_flat_filter(seed in any::<u64>(), nx in 1usize..=4, ny in 1usize..=4) {
            use rand::{Rng, SeedableRng};
            let m = random_momdp(nx, ny, 2, 3, seed);
            let flat = m.to_flat_pomdp();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let mut x = m.initial_observed();
            let mut b = m.initial_hidden_belief();
            for _ in 0..10 {
                let a = rng.random_range(0..2);
                // sample (x2, o) from the model's predictive distribution
                let mut cands = Vec::new();
                let mut buf = vec![0.0; ny];
                for &x2 in m.successors(x, a) {
                    for &o in m.observation_support(x2, a) {
                        let w = m.successor_weights(x, b.as_slice(), a, x2, o, &mut buf);
                        if w > 0.0 { cands.push((x2, o, w)); }
                    }
                }
                let total: f64 = cands.iter().map(|c| c.2).sum();
                let mut u = rng.random::<f64>() * total;
                let mut pick = cands[cands.len() - 1];
                for c in &cands { if u < c.2 { pick = *c; break; } u -= c.2; }
                let (x2, o, _) = pick;
                let factored = belief_update_momdp(&m, x, &b, a, x2, o).unwrap();
                let oracle = flat_marginal(&flat, ny, x, b.as_slice(), a, x2, o).unwrap();
                for (p, q) in factored.as_slice().iter().zip(&oracle) {
                    prop_assert!((p - q).abs() <= 1e-10);
                }
                let sum: f64 = factored.as_slice().iter().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-10);
                x = x2;
                b = factored;
            }
        }
    }
}
