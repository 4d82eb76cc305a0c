//! Optimal single-letter broadcast: a minimum-entropy coloring of the confusion graph.
//!
//! Two atoms conflict when one receiver, seeing the same side information,
//! needs different messages from them. Any valid one-shot broadcast is a proper
//! coloring, and its cost is the entropy of the induced color distribution.

use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::distributions::{
    converse_bound, converse_denominator, DistError, GeneralCbInstance, W1, W2,
};

/// Instances with at most this many atoms are solved by an exact subset DP.
pub const EXACT_ATOM_LIMIT: usize = 16;

/// Largest support for which the confusion graph is built.
pub const CONFLICT_ATOM_LIMIT: usize = 4096;

pub const DEFAULT_NODE_BUDGET: u64 = 5_000_000;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("search budget exhausted; best coloring found costs {:.6} bits", best.h_bits)]
    SearchBudgetExceeded { best: Box<Coloring> },
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Symmetric conflict relation over the support, as adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    adj: Vec<Vec<usize>>,
}

impl ConflictGraph {
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn conflicts(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Whether equal colors never sit on conflicting atoms.
    pub fn is_proper(&self, colors: &[usize]) -> bool {
        self.adj
            .iter()
            .enumerate()
            .all(|(i, ns)| ns.iter().all(|&j| colors[i] != colors[j]))
    }
}

pub fn build_conflicts(inst: &GeneralCbInstance) -> Result<ConflictGraph, OracleError> {
    let atoms = inst.atoms();
    let n = atoms.len();
    if n > CONFLICT_ATOM_LIMIT {
        return Err(OracleError::TooLarge(format!(
            "{n} atoms exceed {CONFLICT_ATOM_LIMIT}"
        )));
    }
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&atoms[i].values, &atoms[j].values);
            if (a[1] == b[1] && a[0] != b[0]) || (a[3] == b[3] && a[2] != b[2]) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    Ok(ConflictGraph { adj })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coloring {
    /// Color of each atom, numbered by first appearance.
    pub colors: Vec<usize>,
    pub num_colors: usize,
    pub h_bits: f64,
    pub optimal: bool,
    pub method: &'static str,
    pub nodes: u64,
}

fn entropy_of(masses: impl IntoIterator<Item = f64>) -> f64 {
    masses
        .into_iter()
        .filter(|&q| q > 0.0)
        .map(|q| -q * q.log2())
        .sum::<f64>()
        .max(0.0)
}

fn relabel(colors: &mut [usize]) -> usize {
    let mut map = std::collections::HashMap::new();
    for c in colors.iter_mut() {
        let next = map.len();
        *c = *map.entry(*c).or_insert(next);
    }
    map.len()
}

fn finish(
    probs: &[f64],
    mut colors: Vec<usize>,
    optimal: bool,
    method: &'static str,
    nodes: u64,
) -> Coloring {
    let num_colors = relabel(&mut colors);
    let mut mass = vec![0.0; num_colors];
    for (c, p) in colors.iter().zip(probs) {
        mass[*c] += p;
    }
    Coloring {
        h_bits: entropy_of(mass),
        colors,
        num_colors,
        optimal,
        method,
        nodes,
    }
}

fn atom_probs(inst: &GeneralCbInstance) -> Vec<f64> {
    inst.atoms()
        .iter()
        .map(|a| a.prob.to_f64().unwrap_or(0.0))
        .collect()
}

/// Minimum-entropy proper coloring.
///
/// Small supports are solved exactly, returning the coloring whose color
/// sequence is lexicographically smallest among the optimal ones. Larger
/// supports use branch and bound, stopping early once the converse is met.
pub fn min_entropy_coloring(
    inst: &GeneralCbInstance,
    node_budget: u64,
) -> Result<Coloring, OracleError> {
    let graph = build_conflicts(inst)?;
    let probs = atom_probs(inst);
    if graph.len() <= EXACT_ATOM_LIMIT {
        Ok(subset_dp(&graph, &probs))
    } else {
        branch_and_bound(&graph, &probs, converse_denominator(inst), node_budget)
    }
}

fn subset_dp(graph: &ConflictGraph, probs: &[f64]) -> Coloring {
    let n = graph.len();
    let full = (1usize << n) - 1;
    let nbr: Vec<usize> = (0..n)
        .map(|i| graph.neighbors(i).iter().fold(0, |m, &j| m | 1 << j))
        .collect();
    let mut indep = vec![true; full + 1];
    let mut cost = vec![0.0f64; full + 1];
    let mut mass = vec![0.0f64; full + 1];
    for s in 1..=full {
        let low = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        indep[s] = indep[rest] && nbr[low] & rest == 0;
        mass[s] = mass[rest] + probs[low];
        cost[s] = if mass[s] > 0.0 {
            -mass[s] * mass[s].log2()
        } else {
            0.0
        };
    }
    let mut best = vec![f64::INFINITY; full + 1];
    best[0] = 0.0;
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut t = rest;
        loop {
            let class = t | low;
            if indep[class] {
                let c = cost[class] + best[s ^ class];
                if c < best[s] {
                    best[s] = c;
                }
            }
            if t == 0 {
                break;
            }
            t = (t - 1) & rest;
        }
    }
    // peel classes greedily, preferring the class that contains the earliest atoms
    let mut colors = vec![0; n];
    let mut remaining = full;
    let mut color = 0;
    while remaining != 0 {
        let low = remaining & remaining.wrapping_neg();
        let rest = remaining ^ low;
        let target = best[remaining];
        let mut chosen: Option<usize> = None;
        let mut t = rest;
        loop {
            let class = t | low;
            if indep[class]
                && cost[class] + best[remaining ^ class] <= target + EPS * target.max(1.0)
            {
                chosen = Some(match chosen {
                    None => class,
                    Some(prev) => {
                        let diff = prev ^ class;
                        if class & diff & diff.wrapping_neg() != 0 {
                            class
                        } else {
                            prev
                        }
                    }
                });
            }
            if t == 0 {
                break;
            }
            t = (t - 1) & rest;
        }
        let class = chosen.expect("an optimal class always exists");
        for (i, c) in colors.iter_mut().enumerate() {
            if class >> i & 1 == 1 {
                *c = color;
            }
        }
        remaining ^= class;
        color += 1;
    }
    finish(probs, colors, true, "exact", 0)
}

struct Search<'a> {
    graph: &'a ConflictGraph,
    order: Vec<usize>,
    probs: &'a [f64],
    suffix_mass: Vec<f64>,
    certificate: f64,
    budget: u64,
    nodes: u64,
    best_h: f64,
    best: Vec<usize>,
    colors: Vec<usize>,
    class_mass: Vec<f64>,
    done: bool,
}

impl Search<'_> {
    /// Entropy after pouring the remaining mass into the heaviest class.
    fn lower_bound(&self, depth: usize) -> f64 {
        let r = self.suffix_mass[depth];
        let (imax, _) =
            self.class_mass
                .iter()
                .enumerate()
                .fold(
                    (usize::MAX, -1.0),
                    |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc },
                );
        if imax == usize::MAX {
            return entropy_of([r]);
        }
        entropy_of(
            self.class_mass
                .iter()
                .enumerate()
                .map(|(i, &m)| if i == imax { m + r } else { m }),
        )
    }

    fn fits(&self, atom: usize, color: usize) -> bool {
        self.graph
            .neighbors(atom)
            .iter()
            .all(|&j| self.colors[j] != color)
    }

    fn dfs(&mut self, depth: usize) {
        if self.done {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.done = true;
            return;
        }
        if depth == self.order.len() {
            let h = entropy_of(self.class_mass.iter().copied());
            if h < self.best_h - EPS {
                self.best_h = h;
                self.best = self.colors.clone();
                if h <= self.certificate + 1e-9 {
                    self.done = true;
                }
            }
            return;
        }
        if self.lower_bound(depth) >= self.best_h - EPS {
            return;
        }
        let atom = self.order[depth];
        let p = self.probs[atom];
        let mut options: Vec<usize> = (0..self.class_mass.len())
            .filter(|&c| self.fits(atom, c))
            .collect();
        options.sort_by(|&a, &b| self.class_mass[b].total_cmp(&self.class_mass[a]));
        for c in options {
            self.colors[atom] = c;
            self.class_mass[c] += p;
            self.dfs(depth + 1);
            self.class_mass[c] -= p;
            self.colors[atom] = usize::MAX;
            if self.done {
                return;
            }
        }
        let c = self.class_mass.len();
        self.colors[atom] = c;
        self.class_mass.push(p);
        self.dfs(depth + 1);
        self.class_mass.pop();
        self.colors[atom] = usize::MAX;
    }
}

fn greedy(graph: &ConflictGraph, order: &[usize]) -> Vec<usize> {
    let mut colors = vec![usize::MAX; graph.len()];
    for &a in order {
        let mut c = 0;
        while graph.neighbors(a).iter().any(|&j| colors[j] == c) {
            c += 1;
        }
        colors[a] = c;
    }
    colors
}

fn branch_and_bound(
    graph: &ConflictGraph,
    probs: &[f64],
    certificate: f64,
    budget: u64,
) -> Result<Coloring, OracleError> {
    let n = graph.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    let mut suffix_mass = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix_mass[k] = suffix_mass[k + 1] + probs[order[k]];
    }
    let seed = finish(probs, greedy(graph, &order), false, "branch-and-bound", 0);
    let mut s = Search {
        graph,
        order,
        probs,
        suffix_mass,
        certificate,
        budget,
        nodes: 0,
        best_h: seed.h_bits + EPS,
        best: seed.colors.clone(),
        colors: vec![usize::MAX; n],
        class_mass: Vec::new(),
        done: seed.h_bits <= certificate + 1e-9,
    };
    let certified_by_seed = s.done;
    if !s.done {
        s.dfs(0);
    }
    let exhausted = s.nodes > s.budget;
    let certified = certified_by_seed || s.best_h <= certificate + 1e-9;
    let out = finish(
        probs,
        s.best,
        certified || !exhausted,
        "branch-and-bound",
        s.nodes,
    );
    if out.optimal {
        Ok(out)
    } else {
        Err(OracleError::SearchBudgetExceeded {
            best: Box::new(out),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleLetterReport {
    pub h_bits: f64,
    pub h_w1w2: f64,
    /// `H(w1, w2) / h_bits`.
    pub rate_l1: f64,
    pub capacity_ub: f64,
    pub gap: f64,
    pub optimal: bool,
    pub coloring: Coloring,
}

/// Best one-shot rate versus the converse capacity bound.
pub fn brute_capacity_l1(
    inst: &GeneralCbInstance,
    node_budget: u64,
) -> Result<SingleLetterReport, OracleError> {
    let bounds = converse_bound(inst)?;
    let coloring = min_entropy_coloring(inst, node_budget)?;
    let h_w1w2 = inst.entropy(W1 | W2);
    let rate_l1 = h_w1w2 / coloring.h_bits;
    Ok(SingleLetterReport {
        h_bits: coloring.h_bits,
        h_w1w2,
        rate_l1,
        capacity_ub: bounds.capacity_ub,
        gap: bounds.capacity_ub - rate_l1,
        optimal: coloring.optimal,
        coloring,
    })
}
