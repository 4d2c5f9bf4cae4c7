//! Reader and writer for the plain-text `.pomdp` format.
//!
//! Supported statements: `discount:`, `values: reward|cost`, `states:`,
//! `actions:`, `observations:` (count or name list), `start:` (`uniform`, a
//! state, or a probability vector), `start include:` / `start exclude:`, and
//! every `T:`, `O:`, `R:` form with `*` wildcards, including the `uniform`
//! and `identity` matrix keywords. Observation-dependent rewards are folded
//! into `R(s,a,s')` by their expectation under `O`.

use super::{renormalize, FormatError};
use crate::model::{DiscreteMdp, DiscretePomdp};

#[derive(Debug, Clone)]
struct Token {
    text: String,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut start: Option<usize> = None;
        let flush = |start: &mut Option<usize>, end: usize, out: &mut Vec<Token>| {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: line[s..end].to_string(),
                    line: li + 1,
                    column: s + 1,
                });
            }
        };
        for (i, ch) in line.char_indices() {
            if ch.is_whitespace() {
                flush(&mut start, i, &mut out);
            } else if ch == ':' {
                flush(&mut start, i, &mut out);
                out.push(Token {
                    text: ":".into(),
                    line: li + 1,
                    column: i + 1,
                });
            } else if start.is_none() {
                start = Some(i);
            }
        }
        flush(&mut start, line.len(), &mut out);
    }
    out
}

const KEYWORDS: [&str; 9] = ["discount", "values", "states", "actions", "observations", "start", "T", "O", "R"];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

#[derive(Default)]
struct Names {
    count: usize,
    names: Vec<String>,
}

impl Names {
    fn resolve(&self, tok: &Token, what: &str) -> Result<Vec<usize>, FormatError> {
        if tok.text == "*" {
            return Ok((0..self.count).collect());
        }
        if let Some(i) = self.names.iter().position(|n| *n == tok.text) {
            return Ok(vec![i]);
        }
        match tok.text.parse::<usize>() {
            Ok(i) if i < self.count => Ok(vec![i]),
            _ => Err(syntax(tok, format!("unknown {what} `{}`", tok.text))),
        }
    }
}

fn syntax(tok: &Token, message: String) -> FormatError {
    FormatError::Syntax {
        line: tok.line,
        column: tok.column,
        message,
    }
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.pos + offset)
    }

    fn next(&mut self) -> Result<Token, FormatError> {
        let t = self.tokens.get(self.pos).cloned().ok_or_else(|| FormatError::Syntax {
            line: self.tokens.last().map_or(1, |t| t.line),
            column: 0,
            message: "unexpected end of file".into(),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_colon(&mut self) -> Result<(), FormatError> {
        let t = self.next()?;
        if t.text != ":" {
            return Err(syntax(&t, format!("expected `:`, found `{}`", t.text)));
        }
        Ok(())
    }

    fn at_statement(&self) -> bool {
        match (self.peek(), self.peek_at(1)) {
            (Some(t), Some(n)) => {
                KEYWORDS.contains(&t.text.as_str())
                    && (n.text == ":" || (t.text == "start" && (n.text == "include" || n.text == "exclude")))
            }
            _ => false,
        }
    }

    fn number(&mut self) -> Result<f64, FormatError> {
        let t = self.next()?;
        t.text
            .parse::<f64>()
            .map_err(|_| syntax(&t, format!("expected a number, found `{}`", t.text)))
    }

    fn numbers(&mut self, n: usize) -> Result<Vec<f64>, FormatError> {
        (0..n).map(|_| self.number()).collect()
    }

    fn names(&mut self) -> Result<Names, FormatError> {
        let first = self.next()?;
        if let Ok(count) = first.text.parse::<usize>() {
            if self.peek().is_none() || self.at_statement() {
                return Ok(Names {
                    count,
                    names: Vec::new(),
                });
            }
        }
        let mut names = vec![first.text];
        while self.peek().is_some() && !self.at_statement() {
            names.push(self.next()?.text);
        }
        Ok(Names {
            count: names.len(),
            names,
        })
    }

    /// Reads `spec (: spec)*` after a `T:`/`O:`/`R:` keyword, up to `max` parts.
    fn specs(&mut self, max: usize) -> Result<Vec<Token>, FormatError> {
        let mut out = vec![self.next()?];
        while out.len() < max && self.peek().is_some_and(|t| t.text == ":") {
            self.pos += 1;
            out.push(self.next()?);
        }
        Ok(out)
    }
}

struct Header {
    discount: Option<f64>,
    cost: bool,
    states: Option<Names>,
    actions: Option<Names>,
    observations: Option<Names>,
}

pub(super) fn parse(text: &str) -> Result<DiscretePomdp, FormatError> {
    let mut p = Parser {
        tokens: tokenize(text),
        pos: 0,
    };
    let mut h = Header {
        discount: None,
        cost: false,
        states: None,
        actions: None,
        observations: None,
    };
    let mut start: Option<Vec<f64>> = None;
    let mut tensors: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None;

    while let Some(tok) = p.peek().cloned() {
        if !p.at_statement() {
            return Err(syntax(&tok, format!("expected a statement, found `{}`", tok.text)));
        }
        p.pos += 1;
        let kw = tok.text.as_str();
        if kw == "start" && p.peek().is_some_and(|t| t.text != ":") {
            let mode = p.next()?;
            p.expect_colon()?;
            let states = h.states.as_ref().ok_or_else(|| syntax(&tok, "`start` before `states`".into()))?;
            let mut chosen = vec![mode.text == "exclude"; states.count];
            while p.peek().is_some() && !p.at_statement() {
                let t = p.next()?;
                for s in states.resolve(&t, "state")? {
                    chosen[s] = mode.text == "include";
                }
            }
            let n = chosen.iter().filter(|&&c| c).count();
            if n == 0 {
                return Err(syntax(&tok, "start distribution is empty".into()));
            }
            start = Some(chosen.iter().map(|&c| if c { 1.0 / n as f64 } else { 0.0 }).collect());
            continue;
        }
        p.expect_colon()?;
        match kw {
            "discount" => h.discount = Some(p.number()?),
            "values" => {
                let t = p.next()?;
                h.cost = match t.text.as_str() {
                    "reward" => false,
                    "cost" => true,
                    other => return Err(syntax(&t, format!("`values` must be reward or cost, found `{other}`"))),
                }
            }
            "states" => h.states = Some(p.names()?),
            "actions" => h.actions = Some(p.names()?),
            "observations" => h.observations = Some(p.names()?),
            "start" => {
                let states = h.states.as_ref().ok_or_else(|| syntax(&tok, "`start` before `states`".into()))?;
                let t = p.peek().cloned().ok_or_else(|| syntax(&tok, "empty start".into()))?;
                if t.text == "uniform" {
                    p.pos += 1;
                    start = Some(vec![1.0 / states.count as f64; states.count]);
                } else if t.text.parse::<f64>().is_ok() && states.count > 1 {
                    start = Some(p.numbers(states.count)?);
                } else {
                    p.pos += 1;
                    let s = states.resolve(&t, "state")?;
                    let mut b = vec![0.0; states.count];
                    b[s[0]] = 1.0;
                    start = Some(b);
                }
            }
            _ => {
                let (ns, na, no) = match (&h.states, &h.actions, &h.observations) {
                    (Some(s), Some(a), Some(o)) => (s.count, a.count, o.count),
                    _ => return Err(syntax(&tok, "states, actions and observations must precede tensors".into())),
                };
                let (t, z, r) = tensors.get_or_insert_with(|| {
                    (vec![0.0; na * ns * ns], vec![0.0; na * ns * no], vec![0.0; na * ns * ns * no])
                });
                let (states, actions, observations) = (
                    h.states.as_ref().unwrap(),
                    h.actions.as_ref().unwrap(),
                    h.observations.as_ref().unwrap(),
                );
                match kw {
                    "T" => {
                        let specs = p.specs(3)?;
                        let acts = actions.resolve(&specs[0], "action")?;
                        let from = specs.get(1).map(|s| states.resolve(s, "state")).transpose()?;
                        let to = specs.get(2).map(|s| states.resolve(s, "state")).transpose()?;
                        fill(&mut p, t, &acts, from, to, ns, ns)?;
                    }
                    "O" => {
                        let specs = p.specs(3)?;
                        let acts = actions.resolve(&specs[0], "action")?;
                        let to = specs.get(1).map(|s| states.resolve(s, "state")).transpose()?;
                        let obs = specs.get(2).map(|s| observations.resolve(s, "observation")).transpose()?;
                        fill(&mut p, z, &acts, to, obs, ns, no)?;
                    }
                    _ => {
                        let specs = p.specs(4)?;
                        let acts = actions.resolve(&specs[0], "action")?;
                        let all_s: Vec<usize> = (0..ns).collect();
                        let all_o: Vec<usize> = (0..no).collect();
                        let from = specs.get(1).map(|s| states.resolve(s, "state")).transpose()?;
                        let to = specs.get(2).map(|s| states.resolve(s, "state")).transpose()?;
                        let obs = specs.get(3).map(|s| observations.resolve(s, "observation")).transpose()?;
                        let sign = if h.cost { -1.0 } else { 1.0 };
                        // Forms: 4 specs -> one value; 3 -> row over o; 2 -> matrix s' x o.
                        let (tos, obss, values) = match (to, obs) {
                            (Some(to), Some(obs)) => {
                                let v = p.number()?;
                                (to, obs, ValueShape::Scalar(v))
                            }
                            (Some(to), None) => (to, all_o.clone(), ValueShape::Row(p.numbers(no)?)),
                            (None, _) => (all_s.clone(), all_o.clone(), ValueShape::Matrix(p.numbers(ns * no)?)),
                        };
                        for &a in &acts {
                            for &s in from.as_deref().unwrap_or(&all_s) {
                                for &s2 in &tos {
                                    for &o in &obss {
                                        let v = match &values {
                                            ValueShape::Scalar(v) => *v,
                                            ValueShape::Row(r) => r[o],
                                            ValueShape::Matrix(m) => m[s2 * no + o],
                                        };
                                        r[((a * ns + s) * ns + s2) * no + o] = sign * v;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let states = h.states.ok_or_else(|| FormatError::Semantic("missing `states`".into()))?;
    let actions = h.actions.ok_or_else(|| FormatError::Semantic("missing `actions`".into()))?;
    let observations = h.observations.ok_or_else(|| FormatError::Semantic("missing `observations`".into()))?;
    let discount = h.discount.ok_or_else(|| FormatError::Semantic("missing `discount`".into()))?;
    let (ns, na, no) = (states.count, actions.count, observations.count);
    let (t_an, z_an, r_an) = tensors.ok_or_else(|| FormatError::Semantic("no T/O/R entries".into()))?;

    // Reorder from [a][s][s'] to [s][a][s'].
    let mut mdp = DiscreteMdp {
        num_states: ns,
        num_actions: na,
        transition: vec![0.0; ns * na * ns],
        reward: vec![0.0; ns * na * ns],
        discount,
    };
    for a in 0..na {
        for s in 0..ns {
            let src = &t_an[(a * ns + s) * ns..(a * ns + s + 1) * ns];
            let dst = mdp.index(s, a, 0);
            mdp.transition[dst..dst + ns].copy_from_slice(src);
        }
    }
    for (i, row) in mdp.transition.chunks_mut(ns).enumerate() {
        renormalize(row, "transition", || format!("(s={},a={})", i / na, i % na))?;
    }
    let mut observation = vec![0.0; ns * na * no];
    for a in 0..na {
        for s2 in 0..ns {
            let src = &z_an[(a * ns + s2) * no..(a * ns + s2 + 1) * no];
            let dst = (s2 * na + a) * no;
            observation[dst..dst + no].copy_from_slice(src);
        }
    }
    for (i, row) in observation.chunks_mut(no).enumerate() {
        renormalize(row, "observation", || format!("(s'={},a={})", i / na, i % na))?;
    }
    for a in 0..na {
        for s in 0..ns {
            for s2 in 0..ns {
                let vals = &r_an[((a * ns + s) * ns + s2) * no..((a * ns + s) * ns + s2 + 1) * no];
                let i = mdp.index(s, a, s2);
                mdp.reward[i] = if vals.iter().all(|&v| v == vals[0]) {
                    vals[0]
                } else {
                    vals.iter()
                        .zip(&observation[(s2 * na + a) * no..(s2 * na + a + 1) * no])
                        .map(|(v, z)| v * z)
                        .sum()
                };
            }
        }
    }
    let mut initial_belief = start.unwrap_or_else(|| vec![1.0 / ns as f64; ns]);
    if initial_belief.len() != ns {
        return Err(FormatError::Semantic("start vector length differs from state count".into()));
    }
    renormalize(&mut initial_belief, "start", String::new)?;
    let pomdp = DiscretePomdp {
        mdp,
        num_observations: no,
        observation,
        initial_belief,
    };
    match super::validated(super::ParsedModel::Pomdp(pomdp))? {
        super::ParsedModel::Pomdp(p) => Ok(p),
        _ => unreachable!(),
    }
}

enum ValueShape {
    Scalar(f64),
    Row(Vec<f64>),
    Matrix(Vec<f64>),
}

/// Fills a `[a][i][j]` tensor from a `T:`/`O:` statement's value block.
fn fill(
    p: &mut Parser,
    tensor: &mut [f64],
    acts: &[usize],
    rows: Option<Vec<usize>>,
    cols: Option<Vec<usize>>,
    ni: usize,
    nj: usize,
) -> Result<(), FormatError> {
    let all_i: Vec<usize> = (0..ni).collect();
    let at = |a: usize, i: usize, j: usize| (a * ni + i) * nj + j;
    match (rows, cols) {
        (Some(rows), Some(cols)) => {
            let v = p.number()?;
            for &a in acts {
                for &i in &rows {
                    for &j in &cols {
                        tensor[at(a, i, j)] = v;
                    }
                }
            }
        }
        (Some(rows), None) => {
            let row = if p.peek().is_some_and(|t| t.text == "uniform") {
                p.pos += 1;
                vec![1.0 / nj as f64; nj]
            } else {
                p.numbers(nj)?
            };
            for &a in acts {
                for &i in &rows {
                    tensor[at(a, i, 0)..at(a, i, 0) + nj].copy_from_slice(&row);
                }
            }
        }
        (None, _) => {
            let t = p.peek().cloned();
            let matrix = match t.as_ref().map(|t| t.text.as_str()) {
                Some("uniform") => {
                    p.pos += 1;
                    vec![1.0 / nj as f64; ni * nj]
                }
                Some("identity") => {
                    p.pos += 1;
                    if ni != nj {
                        return Err(syntax(t.as_ref().unwrap(), "`identity` needs a square matrix".into()));
                    }
                    (0..ni * nj).map(|k| if k / nj == k % nj { 1.0 } else { 0.0 }).collect()
                }
                _ => p.numbers(ni * nj)?,
            };
            for &a in acts {
                for &i in &all_i {
                    tensor[at(a, i, 0)..at(a, i, 0) + nj].copy_from_slice(&matrix[i * nj..(i + 1) * nj]);
                }
            }
        }
    }
    Ok(())
}

/// Writes a POMDP in the `.pomdp` text format; zero entries are omitted.
pub fn write_pomdp_file(pomdp: &DiscretePomdp) -> String {
    use std::fmt::Write;
    let (ns, na, no) = (pomdp.num_states(), pomdp.num_actions(), pomdp.num_observations);
    let mut out = String::new();
    let _ = writeln!(out, "discount: {}", pomdp.discount());
    let _ = writeln!(out, "values: reward");
    let _ = writeln!(out, "states: {ns}");
    let _ = writeln!(out, "actions: {na}");
    let _ = writeln!(out, "observations: {no}");
    let start: Vec<String> = pomdp.initial_belief.iter().map(|p| p.to_string()).collect();
    let _ = writeln!(out, "start: {}", start.join(" "));
    out.push('\n');
    for a in 0..na {
        for s in 0..ns {
            for s2 in 0..ns {
                let t = pomdp.mdp.t(s, a, s2);
                if t != 0.0 {
                    let _ = writeln!(out, "T: {a} : {s} : {s2} {t}");
                }
            }
        }
    }
    for a in 0..na {
        for s2 in 0..ns {
            for o in 0..no {
                let z = pomdp.z(s2, a, o);
                if z != 0.0 {
                    let _ = writeln!(out, "O: {a} : {s2} : {o} {z}");
                }
            }
        }
    }
    for a in 0..na {
        for s in 0..ns {
            for s2 in 0..ns {
                let r = pomdp.mdp.r(s, a, s2);
                if r != 0.0 {
                    let _ = writeln!(out, "R: {a} : {s} : {s2} : * {r}");
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wildcards_and_matrix_keywords() {
        let text = "discount: 0.9\nvalues: cost\nstates: a b\nactions: go\nobservations: 2\n\
                    T: go identity\nO: go uniform\nR: go : * : * : * 2\n";
        let p = parse(text).unwrap();
        assert_eq!(p.mdp.row(1, 0), &[0.0, 1.0]);
        assert_eq!(p.observation_row(0, 0), &[0.5, 0.5]);
        assert_eq!(p.mdp.r(0, 0, 0), -2.0);
        assert_eq!(p.initial_belief, vec![0.5, 0.5]);
    }

    #[test]
    fn observation_dependent_reward_is_expected() {
        let text = "discount: 0.9\nstates: 1\nactions: 1\nobservations: 2\nT: 0 identity\n\
                    O: 0 : 0 0.25 0.75\nR: 0 : 0 : 0 : 0 4\nR: 0 : 0 : 0 : 1 8\n";
        let p = parse(text).unwrap();
        assert!((p.mdp.r(0, 0, 0) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_name_reports_position() {
        let text = "discount: 0.9\nstates: 2\nactions: 1\nobservations: 1\nT: 0 : 5 : 0 1.0\n";
        match parse(text) {
            Err(FormatError::Syntax { line, column, .. }) => assert_eq!((line, column), (5, 8)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_observation_rows_fail() {
        let text = "discount: 0.9\nstates: 2\nactions: 1\nobservations: 1\nT: 0 identity\n";
        assert!(matches!(parse(text), Err(FormatError::Semantic(_))));
    }
}
