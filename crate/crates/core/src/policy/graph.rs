//! Policy graphs (finite-state controllers) extracted from alpha-vector policies.

use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::model::MomdpModel;
use crate::solver::SolveResult;

/// Action-labelled nodes with one out-edge per observation symbol.
///
/// For a MOMDP the observation symbols are the possible `(x', o)` pairs, listed
/// in `symbols`; edge `edges[n][i]` is followed on receiving `symbols[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyGraph {
    pub actions: Vec<usize>,
    pub edges: Vec<Vec<usize>>,
    pub start_node: usize,
    pub symbols: Vec<(usize, usize)>,
    /// Nodes added to absorb observations that cannot occur.
    pub synthetic: Vec<bool>,
    /// Node count before unreachable nodes were removed.
    pub nodes_before_pruning: usize,
}

impl PolicyGraph {
    pub fn num_nodes(&self) -> usize {
        self.actions.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol_index(&self, x2: usize, o: usize) -> Option<usize> {
        self.symbols.iter().position(|&s| s == (x2, o))
    }

    /// Every node has exactly one valid edge per symbol.
    pub fn is_well_formed(&self) -> bool {
        self.start_node < self.num_nodes()
            && self.edges.len() == self.num_nodes()
            && self.synthetic.len() == self.num_nodes()
            && self
                .edges
                .iter()
                .all(|e| e.len() == self.num_symbols() && e.iter().all(|&t| t < self.num_nodes()))
    }

    /// Text adjacency list: a header, then one line per node
    /// `node action synthetic target_0 … target_{|O|-1}`.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# nodes {} symbols {} start {}", self.num_nodes(), self.num_symbols(), self.start_node);
        let syms: Vec<String> = self.symbols.iter().map(|(x, o)| format!("{x}:{o}")).collect();
        let _ = writeln!(out, "# symbols {}", syms.join(" "));
        for n in 0..self.num_nodes() {
            let targets: Vec<String> = self.edges[n].iter().map(|t| t.to_string()).collect();
            let _ = writeln!(out, "{n} {} {} {}", self.actions[n], u8::from(self.synthetic[n]), targets.join(" "));
        }
        out
    }
}

/// Follows the graph: the start node's action, then one action per symbol.
pub fn execute_graph(graph: &PolicyGraph, observations: &[usize]) -> Vec<usize> {
    let mut node = graph.start_node;
    let mut out = Vec::with_capacity(observations.len() + 1);
    out.push(graph.actions[node]);
    for &o in observations {
        node = graph.edges[node][o];
        out.push(graph.actions[node]);
    }
    out
}

/// `(x', o)` pairs that can follow some action from some observed state.
pub fn observation_symbols(m: &MomdpModel) -> Vec<(usize, usize)> {
    let (nx, _, na, _) = m.dims();
    let mut symbols = Vec::new();
    for x in 0..nx {
        for a in 0..na {
            for &x2 in m.successors(x, a) {
                for &o in m.observation_support(x2, a) {
                    symbols.push((x2, o));
                }
            }
        }
    }
    symbols.sort_unstable();
    symbols.dedup();
    symbols
}

struct Node {
    x: usize,
    alpha: usize,
    witness: Vec<f64>,
    depth: usize,
}

/// Converts the lower-bound policy into a graph by witness-belief lookahead.
///
/// Nodes are `(x, alpha)` pairs reached from `(x₀, b⁰)` within `horizon`
/// steps; each keeps the first belief that reached it. Edges from a node
/// follow its witness one step. Nodes at the horizon route each symbol to the
/// existing node at `x'` whose alpha scores best at the updated witness.
/// Symbols impossible from a node lead to an absorbing node repeating its action.
pub fn to_policy_graph(result: &SolveResult, m: &MomdpModel, horizon: usize) -> PolicyGraph {
    let lower = &result.lower;
    let symbols = observation_symbols(m);
    let x0 = result.initial_observed;
    let b0 = result.initial_belief.clone();
    let mut nodes: Vec<Node> = Vec::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let best = |x: usize, b: &[f64]| lower.best(x, b).map_or(0, |(i, _)| i);

    let a0 = best(x0, &b0);
    index.insert((x0, a0), 0);
    nodes.push(Node {
        x: x0,
        alpha: a0,
        witness: b0,
        depth: 0,
    });

    // Targets per node; `None` marks an impossible symbol.
    let mut targets: Vec<Vec<Option<usize>>> = Vec::new();
    let ny = m.num_hidden();
    let mut buf = vec![0.0; ny];
    let mut i = 0;
    while i < nodes.len() {
        let (x, action, depth) = (nodes[i].x, lower.alphas(nodes[i].x)[nodes[i].alpha].action, nodes[i].depth);
        let witness = nodes[i].witness.clone();
        let mut row = Vec::with_capacity(symbols.len());
        for &(x2, o) in &symbols {
            let reachable = m.successors(x, action).contains(&x2);
            let total = if reachable {
                m.successor_weights(x, &witness, action, x2, o, &mut buf)
            } else {
                0.0
            };
            if !(total > 0.0) {
                row.push(None);
                continue;
            }
            let next: Vec<f64> = buf.iter().map(|v| v / total).collect();
            let alpha = best(x2, &next);
            let target = match index.get(&(x2, alpha)) {
                Some(&t) => Some(t),
                None if depth < horizon => {
                    let t = nodes.len();
                    index.insert((x2, alpha), t);
                    nodes.push(Node {
                        x: x2,
                        alpha,
                        witness: next,
                        depth: depth + 1,
                    });
                    Some(t)
                }
                None => nodes
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| n.x == x2)
                    .map(|(t, n)| (t, lower.alphas(x2)[n.alpha].value(&next)))
                    .fold(None, |acc: Option<(usize, f64)>, (t, v)| match acc {
                        Some((_, bv)) if bv >= v => acc,
                        _ => Some((t, v)),
                    })
                    .map(|(t, _)| t),
            };
            row.push(target);
        }
        targets.push(row);
        i += 1;
    }

    let mut actions: Vec<usize> = nodes.iter().map(|n| lower.alphas(n.x)[n.alpha].action).collect();
    let mut synthetic = vec![false; nodes.len()];
    let mut absorbing: HashMap<usize, usize> = HashMap::new();
    let mut edges = Vec::with_capacity(nodes.len());
    for (n, row) in targets.into_iter().enumerate() {
        let mut e = Vec::with_capacity(row.len());
        let act = actions[n];
        for t in row {
            e.push(match t {
                Some(t) => t,
                None => *absorbing.entry(act).or_insert_with(|| {
                    actions.push(act);
                    synthetic.push(true);
                    actions.len() - 1
                }),
            });
        }
        edges.push(e);
    }
    for n in nodes.len()..actions.len() {
        edges.push(vec![n; symbols.len()]);
    }
    let graph = PolicyGraph {
        nodes_before_pruning: actions.len(),
        actions,
        edges,
        start_node: 0,
        symbols,
        synthetic,
    };
    prune_unreachable(graph)
}

/// Drops nodes not reachable from the start node, renumbering the rest.
pub fn prune_unreachable(mut g: PolicyGraph) -> PolicyGraph {
    let n = g.num_nodes();
    let mut seen = vec![false; n];
    let mut stack = vec![g.start_node];
    seen[g.start_node] = true;
    while let Some(v) = stack.pop() {
        for &t in &g.edges[v] {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    let mut remap = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if seen[v] {
            remap[v] = next;
            next += 1;
        }
    }
    let keep = |v: &usize| seen[*v];
    g.actions = (0..n).filter(keep).map(|v| g.actions[v]).collect();
    g.synthetic = (0..n).filter(keep).map(|v| g.synthetic[v]).collect();
    g.edges = (0..n)
        .filter(keep)
        .map(|v| g.edges[v].iter().map(|&t| remap[t]).collect())
        .collect();
    g.start_node = remap[g.start_node];
    g
}

/// Value of running `graph` on `m` from each node, as `[node][x][y]`.
///
/// Iterates from `−R_max/(1−γ)`, so every iterate is a lower bound on the
/// true value. A symbol the graph does not list keeps the controller in place.
pub fn evaluate_graph(graph: &PolicyGraph, m: &MomdpModel, tol: f64, max_iterations: usize) -> Vec<Vec<Vec<f64>>> {
    let (nx, ny, _, _) = m.dims();
    let floor = -m.r_max() / (1.0 - m.discount());
    let nodes = graph.num_nodes();
    let index: HashMap<(usize, usize), usize> = graph.symbols.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut v = vec![vec![vec![floor; ny]; nx]; nodes];
    let mut h = vec![0.0; ny];
    for _ in 0..max_iterations {
        let mut next = vec![vec![vec![0.0; ny]; nx]; nodes];
        let mut residual = 0.0f64;
        for n in 0..nodes {
            let a = graph.actions[n];
            for x in 0..nx {
                let out = &mut next[n][x];
                out.copy_from_slice(m.expected_reward(x, a));
                for &x2 in m.successors(x, a) {
                    h.iter_mut().for_each(|e| *e = 0.0);
                    for &o in m.observation_support(x2, a) {
                        let t = index.get(&(x2, o)).map_or(n, |&i| graph.edges[n][i]);
                        for ((he, z), ve) in h.iter_mut().zip(m.z_column(x2, a, o)).zip(&v[t][x2]) {
                            *he += z * ve;
                        }
                    }
                    m.kernel(x, a, x2).back_project_add(&h, m.discount(), out);
                }
                for (e, old) in out.iter_mut().zip(&v[n][x]) {
                    *e = e.max(*old);
                    residual = residual.max(*e - old);
                }
            }
        }
        v = next;
        if residual <= tol {
            break;
        }
    }
    v
}
