//! Task skeletons: the known parts of a task plus a description of which
//! transition and observation rows are unknown.

use serde::{Deserialize, Serialize};

use super::McbrlError;
use crate::model::{DiscreteMdp, DiscretePomdp};

/// One entry of a parametric row: `constant + Σ coef · θ[param]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineEntry {
    pub column: usize,
    pub constant: f64,
    #[serde(default)]
    pub terms: Vec<(usize, f64)>,
}

impl AffineEntry {
    pub fn constant(column: usize, value: f64) -> Self {
        Self {
            column,
            constant: value,
            terms: Vec::new(),
        }
    }

    /// `param` with coefficient 1.
    pub fn param(column: usize, param: usize) -> Self {
        Self {
            column,
            constant: 0.0,
            terms: vec![(param, 1.0)],
        }
    }

    /// `1 − param`.
    pub fn complement(column: usize, param: usize) -> Self {
        Self {
            column,
            constant: 1.0,
            terms: vec![(param, -1.0)],
        }
    }
}

/// How one probability row of the task is determined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSpec {
    Known(Vec<f64>),
    /// The whole row is a free parameter.
    Unknown,
    /// Entries are affine in named scalar parameters; unlisted columns are 0
    /// and repeated columns add up.
    Parametric(Vec<AffineEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartState {
    Known(usize),
    Distribution(Vec<f64>),
}

impl StartState {
    pub fn distribution(&self, num_states: usize) -> Vec<f64> {
        match self {
            StartState::Known(s) => {
                let mut b = vec![0.0; num_states];
                b[*s] = 1.0;
                b
            }
            StartState::Distribution(b) => b.clone(),
        }
    }

    pub fn known(&self) -> Option<usize> {
        match self {
            StartState::Known(s) => Some(*s),
            StartState::Distribution(b) => {
                let mut support = b.iter().enumerate().filter(|(_, &p)| p > 0.0);
                match (support.next(), support.next()) {
                    (Some((s, _)), None) => Some(s),
                    _ => None,
                }
            }
        }
    }
}

/// One complete assignment of the unknowns of a skeleton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    /// Values of the named scalar parameters.
    pub scalars: Vec<f64>,
    /// Unknown rows in skeleton order: transition rows first, then observation rows.
    pub rows: Vec<Vec<f64>>,
}

/// Known structure of a task with unknown parameters.
///
/// `transition` holds one [`RowSpec`] per `(s, a)` and `observation`, when
/// present, one per `(s', a)`. Rewards are fully known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSkeleton {
    pub num_states: usize,
    pub num_actions: usize,
    #[serde(default)]
    pub num_observations: Option<usize>,
    pub discount: f64,
    /// `R[s][a][s']`.
    pub reward: Vec<f64>,
    pub transition: Vec<RowSpec>,
    #[serde(default)]
    pub observation: Option<Vec<RowSpec>>,
    /// Names of the scalar parameters referenced by parametric rows.
    #[serde(default)]
    pub parameters: Vec<String>,
    pub start: StartState,
}

impl TaskSkeleton {
    /// Scalar parameters plus `len − 1` for every unknown row.
    pub fn num_free_parameters(&self) -> usize {
        let row_free = |specs: &[RowSpec], width: usize| {
            specs.iter().filter(|r| matches!(r, RowSpec::Unknown)).count() * (width - 1)
        };
        self.parameters.len()
            + row_free(&self.transition, self.num_states)
            + self
                .observation
                .as_deref()
                .map_or(0, |o| row_free(o, self.num_observations.unwrap_or(0)))
    }

    /// `(row index in the T or Z spec list, row width)` for every unknown row,
    /// transition rows first.
    pub fn unknown_rows(&self) -> Vec<(RowKind, usize, usize)> {
        let mut out: Vec<_> = self
            .transition
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r, RowSpec::Unknown))
            .map(|(i, _)| (RowKind::Transition, i, self.num_states))
            .collect();
        if let Some(obs) = &self.observation {
            let no = self.num_observations.unwrap_or(0);
            out.extend(
                obs.iter()
                    .enumerate()
                    .filter(|(_, r)| matches!(r, RowSpec::Unknown))
                    .map(|(i, _)| (RowKind::Observation, i, no)),
            );
        }
        out
    }

    pub fn has_unknown_observations(&self) -> bool {
        self.observation
            .as_ref()
            .is_some_and(|o| o.iter().any(|r| !matches!(r, RowSpec::Known(_))))
    }

    pub fn check_shapes(&self) -> Result<(), McbrlError> {
        let (ns, na) = (self.num_states, self.num_actions);
        let bad = |m: String| Err(McbrlError::Skeleton(m));
        if self.reward.len() != ns * na * ns {
            return bad(format!("reward has {} entries, expected {}", self.reward.len(), ns * na * ns));
        }
        if self.transition.len() != ns * na {
            return bad(format!("{} transition rows, expected {}", self.transition.len(), ns * na));
        }
        let np = self.parameters.len();
        let check_rows = |specs: &[RowSpec], width: usize, what: &str| -> Result<(), McbrlError> {
            for (i, r) in specs.iter().enumerate() {
                match r {
                    RowSpec::Known(row) if row.len() != width => {
                        return bad(format!("{what} row {i} has {} entries, expected {width}", row.len()))
                    }
                    RowSpec::Parametric(entries) => {
                        if let Some(e) = entries.iter().find(|e| e.column >= width || e.terms.iter().any(|t| t.0 >= np)) {
                            return bad(format!("{what} row {i} references column {} or an unknown parameter", e.column));
                        }
                    }
                    _ => {}
                }
            }
            Ok(())
        };
        check_rows(&self.transition, ns, "transition")?;
        if let Some(obs) = &self.observation {
            let no = self
                .num_observations
                .ok_or_else(|| McbrlError::Skeleton("observation rows without an observation count".into()))?;
            if obs.len() != ns * na {
                return bad(format!("{} observation rows, expected {}", obs.len(), ns * na));
            }
            check_rows(obs, no, "observation")?;
        }
        if self.start.distribution(ns).len() != ns {
            return bad("start distribution has the wrong length".into());
        }
        Ok(())
    }

    /// Checks that `h` supplies exactly the parameters this skeleton needs.
    pub fn check_hypothesis(&self, h: &Hypothesis) -> Result<(), McbrlError> {
        let rows = self.unknown_rows();
        if h.scalars.len() != self.parameters.len() || h.rows.len() != rows.len() {
            return Err(McbrlError::Mismatch(format!(
                "hypothesis has {} scalars and {} rows, skeleton needs {} and {}",
                h.scalars.len(),
                h.rows.len(),
                self.parameters.len(),
                rows.len()
            )));
        }
        for ((_, i, width), row) in rows.iter().zip(&h.rows) {
            if row.len() != *width {
                return Err(McbrlError::Mismatch(format!("unknown row {i} has {} entries, expected {width}", row.len())));
            }
        }
        Ok(())
    }

    fn complete_rows(&self, specs: &[RowSpec], width: usize, h: &Hypothesis, unknown: &mut std::slice::Iter<'_, Vec<f64>>) -> Vec<f64> {
        let mut out = Vec::with_capacity(specs.len() * width);
        for spec in specs {
            match spec {
                RowSpec::Known(row) => out.extend_from_slice(row),
                RowSpec::Unknown => out.extend_from_slice(unknown.next().expect("checked hypothesis")),
                RowSpec::Parametric(entries) => {
                    let mut row = vec![0.0; width];
                    for e in entries {
                        row[e.column] += e.constant + e.terms.iter().map(|&(p, c)| c * h.scalars[p]).sum::<f64>();
                    }
                    out.extend(row);
                }
            }
        }
        out
    }

    /// `T[s][a][s']` under hypothesis `h`.
    pub fn complete_transition(&self, h: &Hypothesis) -> Vec<f64> {
        self.complete_rows(&self.transition, self.num_states, h, &mut h.rows.iter())
    }

    /// `Z[s'][a][o]` under hypothesis `h`, if the skeleton has observations.
    pub fn complete_observation(&self, h: &Hypothesis) -> Option<Vec<f64>> {
        let obs = self.observation.as_ref()?;
        let skip = self.transition.iter().filter(|r| matches!(r, RowSpec::Unknown)).count();
        let mut rows = h.rows.iter();
        for _ in 0..skip {
            rows.next();
        }
        Some(self.complete_rows(obs, self.num_observations.unwrap_or(0), h, &mut rows))
    }

    pub fn mdp(&self, h: &Hypothesis) -> DiscreteMdp {
        DiscreteMdp {
            num_states: self.num_states,
            num_actions: self.num_actions,
            transition: self.complete_transition(h),
            reward: self.reward.clone(),
            discount: self.discount,
        }
    }

    /// The POMDP for hypothesis `h`; `None` for skeletons without observations.
    pub fn pomdp(&self, h: &Hypothesis) -> Option<DiscretePomdp> {
        Some(DiscretePomdp {
            mdp: self.mdp(h),
            num_observations: self.num_observations?,
            observation: self.complete_observation(h)?,
            initial_belief: self.start.distribution(self.num_states),
        })
    }

    /// Hypothesis for a skeleton whose unknowns are all named scalars.
    pub fn hypothesis_from_scalars(&self, scalars: Vec<f64>) -> Hypothesis {
        Hypothesis {
            scalars,
            rows: Vec::new(),
        }
    }

    /// Hypothesis with every unknown row taken from a full model.
    pub fn hypothesis_from_model(&self, transition: &[f64], observation: Option<&[f64]>, scalars: Vec<f64>) -> Hypothesis {
        let rows = self
            .unknown_rows()
            .into_iter()
            .map(|(kind, i, width)| {
                let src = match kind {
                    RowKind::Transition => transition,
                    RowKind::Observation => observation.expect("observation tensor for unknown observation rows"),
                };
                src[i * width..(i + 1) * width].to_vec()
            })
            .collect();
        Hypothesis { scalars, rows }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    Transition,
    Observation,
}
