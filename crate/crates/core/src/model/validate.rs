//! Structural checks shared by every model type.

use std::fmt;

/// Tolerance on stochastic row sums for constructed models.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A single broken invariant, naming the tensor slice it was found in.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub tensor: &'static str,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.tensor, self.location, self.message)
    }
}

/// Anything that can report its own invariant violations.
pub trait Validate {
    fn violations(&self) -> Vec<Violation>;
}

/// `Ok(())` iff all invariants hold; otherwise every violation found.
pub fn validate_model<M: Validate + ?Sized>(model: &M) -> Result<(), Vec<Violation>> {
    let v = model.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Collects violations while walking tensors.
#[derive(Default)]
pub(crate) struct Checker {
    pub(crate) found: Vec<Violation>,
}

impl Checker {
    pub(crate) fn push(&mut self, tensor: &'static str, location: String, message: String) {
        self.found.push(Violation {
            tensor,
            location,
            message,
        });
    }

    /// Checks entries are probabilities and the row sums to one.
    pub(crate) fn stochastic_row(
        &mut self,
        tensor: &'static str,
        location: impl Fn() -> String,
        row: &[f64],
    ) {
        let mut sum = 0.0;
        for (i, &p) in row.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                self.push(tensor, location(), format!("entry {i} = {p} is not a probability"));
                return;
            }
            sum += p;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            self.push(tensor, location(), format!("row sums to {sum}"));
        }
    }

    pub(crate) fn finite(&mut self, tensor: &'static str, location: impl Fn() -> String, values: &[f64]) {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            self.push(tensor, location(), format!("entry {i} = {v} is not finite"));
        }
    }

    pub(crate) fn discount(&mut self, discount: f64) {
        if !(discount > 0.0 && discount < 1.0) {
            self.push("discount", String::new(), format!("{discount} outside (0,1)"));
        }
    }

    pub(crate) fn length(&mut self, tensor: &'static str, got: usize, want: usize) -> bool {
        if got != want {
            self.push(tensor, String::new(), format!("has {got} entries, expected {want}"));
            false
        } else {
            true
        }
    }
}
