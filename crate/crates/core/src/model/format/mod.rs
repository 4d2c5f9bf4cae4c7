//! Model text formats.
//!
//! Two readers share one entry point, [`parse_model_file`]: the JSON model
//! document (see `docs/model-format.md`) and the plain-text `.pomdp` format
//! used by the classic POMDP benchmark collections. Documents starting with
//! `{` are read as JSON.

mod cassandra;
mod json;

use thiserror::Error;

use super::validate::{Validate, Violation};
use super::{DiscreteMdp, DiscretePomdp, MomdpModel};

pub use cassandra::write_pomdp_file;

/// Row sums within this distance of 1 are accepted and renormalized.
pub const PARSE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error("model violates invariants: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedModel {
    Mdp(DiscreteMdp),
    Pomdp(DiscretePomdp),
    Momdp(MomdpModel),
}

impl ParsedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            ParsedModel::Mdp(_) => "mdp",
            ParsedModel::Pomdp(_) => "pomdp",
            ParsedModel::Momdp(_) => "momdp",
        }
    }

    /// Converts to the solver's representation; MDPs start in state 0.
    pub fn into_momdp(self) -> MomdpModel {
        match self {
            ParsedModel::Mdp(m) => MomdpModel::from_mdp(&m, 0),
            ParsedModel::Pomdp(p) => MomdpModel::from_flat_pomdp(&p),
            ParsedModel::Momdp(m) => m,
        }
    }
}

/// Reads either supported format.
pub fn parse_model_file(text: &str) -> Result<ParsedModel, FormatError> {
    if text.trim_start().starts_with('{') {
        json::parse(text)
    } else {
        cassandra::parse(text).map(ParsedModel::Pomdp)
    }
}

/// Writes the JSON model document.
pub fn serialize_model(model: &ParsedModel) -> String {
    json::serialize(model)
}

fn validated(model: ParsedModel) -> Result<ParsedModel, FormatError> {
    let v = match &model {
        ParsedModel::Mdp(m) => m.violations(),
        ParsedModel::Pomdp(p) => p.violations(),
        ParsedModel::Momdp(m) => m.violations(),
    };
    if v.is_empty() {
        Ok(model)
    } else {
        Err(FormatError::Invalid(v))
    }
}

/// Rescales a probability row whose sum is within [`PARSE_TOLERANCE`] of 1.
fn renormalize(row: &mut [f64], tensor: &str, location: impl Fn() -> String) -> Result<(), FormatError> {
    if let Some(bad) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(FormatError::Semantic(format!("{tensor} {}: entry {bad} is not a probability", location())));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PARSE_TOLERANCE {
        return Err(FormatError::Semantic(format!("{tensor} row {} sums to {sum}", location())));
    }
    if sum != 1.0 {
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::tiger::{build_tiger, TigerSpec};
    use crate::mcbrl::{build_bapomdp, HypothesisSet};

    const TIGER_JSON: &str = include_str!("../../../../../models/tiger.json");
    const TIGER_POMDP: &str = include_str!("../../../../../models/tiger.pomdp");

    #[test]
    fn repo_tiger_files_match_programmatic_model() {
        let (_, tiger) = build_tiger(&TigerSpec::symmetric(0.15));
        assert_eq!(parse_model_file(TIGER_JSON).unwrap(), ParsedModel::Pomdp(tiger.clone()));
        assert_eq!(parse_model_file(TIGER_POMDP).unwrap(), ParsedModel::Pomdp(tiger));
    }

    #[test]
    fn serializer_round_trips() {
        let (skeleton, tiger) = build_tiger(&TigerSpec::symmetric(0.15));
        let p = ParsedModel::Pomdp(tiger.clone());
        assert_eq!(parse_model_file(&serialize_model(&p)).unwrap(), p);

        let hyps = HypothesisSet::new(vec![
            skeleton.hypothesis_from_scalars(vec![0.1, 0.2]),
            skeleton.hypothesis_from_scalars(vec![0.3, 0.05]),
        ]);
        let m = ParsedModel::Momdp(build_bapomdp(&skeleton, &hyps).unwrap().model);
        assert_eq!(parse_model_file(&serialize_model(&m)).unwrap(), m);

        let text = write_pomdp_file(&tiger);
        assert_eq!(parse_model_file(&text).unwrap(), p);
    }

    #[test]
    fn missing_observation_tensor_is_semantic_error() {
        let mut doc: serde_json::Value = serde_json::from_str(TIGER_JSON).unwrap();
        doc.as_object_mut().unwrap().remove("observation");
        let err = parse_model_file(&doc.to_string()).unwrap_err();
        assert!(matches!(err, FormatError::Semantic(_)), "{err}");
    }

    #[test]
    fn near_unit_rows_are_renormalized() {
        let mut doc: serde_json::Value = serde_json::from_str(TIGER_JSON).unwrap();
        doc["transition"][0][0] = serde_json::json!([1.000000001, 0.0]);
        match parse_model_file(&doc.to_string()).unwrap() {
            ParsedModel::Pomdp(p) => assert_eq!(p.mdp.row(0, 0), &[1.0, 0.0]),
            other => panic!("unexpected {}", other.kind()),
        }
        doc["transition"][0][0] = serde_json::json!([0.9, 0.0]);
        assert!(matches!(
            parse_model_file(&doc.to_string()),
            Err(FormatError::Semantic(_))
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_model_file("{\n  \"kind\": \"pomdp\",\n  oops\n}") {
            Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
