//! Priors over the unknowns of a [`TaskSkeleton`] and hypothesis sampling.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::skeleton::{Hypothesis, TaskSkeleton};
use super::McbrlError;
use crate::model::validate_model;

/// Prior on one named scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum ScalarPrior {
    Uniform { lo: f64, hi: f64 },
    Beta { alpha: f64, beta: f64 },
    Fixed { value: f64 },
}

impl ScalarPrior {
    pub fn mean(&self) -> f64 {
        match *self {
            ScalarPrior::Uniform { lo, hi } => 0.5 * (lo + hi),
            ScalarPrior::Beta { alpha, beta } => alpha / (alpha + beta),
            ScalarPrior::Fixed { value } => value,
        }
    }

    fn check(&self) -> Result<(), String> {
        match *self {
            ScalarPrior::Uniform { lo, hi } if !(lo <= hi) => Err(format!("uniform bounds {lo} > {hi}")),
            ScalarPrior::Beta { alpha, beta } if !(alpha > 0.0 && beta > 0.0) => {
                Err(format!("beta parameters ({alpha}, {beta}) must be positive"))
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            ScalarPrior::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            ScalarPrior::Beta { alpha, beta } => Beta::new(alpha, beta).expect("checked parameters").sample(rng),
            ScalarPrior::Fixed { value } => value,
        }
    }
}

/// Draws one hypothesis from an RNG stream; must be deterministic in the stream.
pub type HypothesisSampler = Arc<dyn Fn(&mut dyn RngCore) -> Hypothesis + Send + Sync>;

/// Product prior: independent scalar priors plus a Dirichlet per unknown row.
/// A custom sampler, when set, replaces both.
#[derive(Clone, Serialize, Deserialize)]
pub struct Prior {
    pub scalars: Vec<ScalarPrior>,
    /// Dirichlet concentrations, one vector per unknown row in skeleton order.
    pub rows: Vec<Vec<f64>>,
    #[serde(skip)]
    pub custom: Option<HypothesisSampler>,
}

impl fmt::Debug for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Prior")
            .field("scalars", &self.scalars)
            .field("rows", &self.rows)
            .field("custom", &self.custom.is_some())
            .finish()
    }
}

impl Prior {
    pub fn new(scalars: Vec<ScalarPrior>, rows: Vec<Vec<f64>>) -> Result<Self, McbrlError> {
        for s in &scalars {
            s.check().map_err(McbrlError::Prior)?;
        }
        if let Some(r) = rows.iter().find(|r| r.iter().any(|&c| !(c > 0.0))) {
            return Err(McbrlError::Prior(format!("Dirichlet concentrations {r:?} must be positive")));
        }
        Ok(Self {
            scalars,
            rows,
            custom: None,
        })
    }

    /// Given scalar priors and a flat Dirichlet on every unknown row.
    pub fn with_flat_rows(skeleton: &TaskSkeleton, scalars: Vec<ScalarPrior>) -> Result<Self, McbrlError> {
        let rows = skeleton.unknown_rows().into_iter().map(|(_, _, w)| vec![1.0; w]).collect();
        Self::new(scalars, rows)
    }

    pub fn custom(sampler: HypothesisSampler) -> Self {
        Self {
            scalars: Vec::new(),
            rows: Vec::new(),
            custom: Some(sampler),
        }
    }

    /// Prior mean of every parameter. Not available for custom samplers.
    pub fn mean(&self) -> Option<Hypothesis> {
        if self.custom.is_some() {
            return None;
        }
        Some(Hypothesis {
            scalars: self.scalars.iter().map(ScalarPrior::mean).collect(),
            rows: self
                .rows
                .iter()
                .map(|c| {
                    let total: f64 = c.iter().sum();
                    c.iter().map(|v| v / total).collect()
                })
                .collect(),
        })
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Hypothesis {
        if let Some(f) = &self.custom {
            return f(rng);
        }
        let scalars = self.scalars.iter().map(|s| s.sample(rng)).collect();
        let rows = self.rows.iter().map(|c| sample_dirichlet(c, rng)).collect();
        Hypothesis { scalars, rows }
    }

    /// Checks that the prior fits the skeleton's parameters and unknown rows.
    pub fn check_against(&self, skeleton: &TaskSkeleton) -> Result<(), McbrlError> {
        if self.custom.is_some() {
            return Ok(());
        }
        let rows = skeleton.unknown_rows();
        if self.scalars.len() != skeleton.parameters.len() || self.rows.len() != rows.len() {
            return Err(McbrlError::Mismatch(format!(
                "prior covers {} scalars and {} rows, skeleton has {} and {}",
                self.scalars.len(),
                self.rows.len(),
                skeleton.parameters.len(),
                rows.len()
            )));
        }
        for (c, (_, i, w)) in self.rows.iter().zip(rows) {
            if c.len() != w {
                return Err(McbrlError::Mismatch(format!("Dirichlet for row {i} has {} entries, row has {w}", c.len())));
            }
        }
        Ok(())
    }
}

/// Dirichlet draw by normalizing independent Gamma(c, 1) variates.
pub fn sample_dirichlet(concentration: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let mut g: Vec<f64> = concentration
            .iter()
            .map(|&c| Gamma::new(c, 1.0).expect("positive concentration").sample(rng))
            .collect();
        let total: f64 = g.iter().sum();
        if total > 0.0 {
            g.iter_mut().for_each(|v| *v /= total);
            return g;
        }
    }
}

/// `K` hypotheses, each a complete parameter assignment for a skeleton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSet {
    pub hypotheses: Vec<Hypothesis>,
}

impl HypothesisSet {
    pub fn new(hypotheses: Vec<Hypothesis>) -> Self {
        Self { hypotheses }
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Hypothesis> {
        self.hypotheses.iter()
    }

    /// Replaces the last hypothesis with `h`, keeping `K` unchanged.
    pub fn insert_truth(&mut self, h: Hypothesis) {
        match self.hypotheses.last_mut() {
            Some(last) => *last = h,
            None => self.hypotheses.push(h),
        }
    }
}

/// Draws `k` independent hypotheses and checks that each completes the
/// skeleton into a valid model.
pub fn sample_hypotheses<R: Rng + ?Sized>(
    skeleton: &TaskSkeleton,
    prior: &Prior,
    k: usize,
    rng: &mut R,
) -> Result<HypothesisSet, McbrlError> {
    if k == 0 {
        return Err(McbrlError::Mismatch("K must be at least 1".into()));
    }
    skeleton.check_shapes()?;
    prior.check_against(skeleton)?;
    let mut rng: &mut dyn RngCore = &mut DynRng(rng);
    let mut hypotheses = Vec::with_capacity(k);
    for i in 0..k {
        let h = prior.sample(&mut rng);
        skeleton.check_hypothesis(&h)?;
        check_complete(skeleton, &h).map_err(|m| McbrlError::InvalidHypothesis { index: i, message: m })?;
        hypotheses.push(h);
    }
    Ok(HypothesisSet { hypotheses })
}

pub(crate) fn check_complete(skeleton: &TaskSkeleton, h: &Hypothesis) -> Result<(), String> {
    let first = |v: Vec<crate::model::Violation>| v.first().map(|v| v.to_string()).unwrap_or_default();
    match skeleton.pomdp(h) {
        Some(p) => validate_model(&p).map_err(first),
        None => validate_model(&skeleton.mdp(h)).map_err(first),
    }
}

struct DynRng<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for DynRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}
