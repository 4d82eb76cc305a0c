//! Matching instances: `w2 = pi[w1p][w2p](w1)` with uniform independent `w1p, w2p, w1`.
//!
//! Grid cells, rows, columns and permutation points are 0-indexed here and
//! 1-indexed in everything shown to users.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::distributions::{Atom, GeneralCbInstance};

/// Default limit on the number of enumerated grid cycles.
pub const DEFAULT_CYCLE_CAP: usize = 1_000_000;

/// Largest `m * m1 * m2` converted by [`to_general`].
pub const GENERAL_ATOM_LIMIT: usize = 1_000_000;

pub type Cell = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid matching instance: {0}")]
    InvalidInstance(String),
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("cycle enumeration exceeded the budget of {0} cycles")]
    CycleBudgetExceeded(usize),
    #[error("expected a 4x3 grid, got {0}x{1}")]
    WrongShape(usize, usize),
    #[error("instance too large: {0}")]
    TooLarge(String),
}

/// A bijection on `0..m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, MatchingError> {
        let mut seen = vec![false; map.len()];
        for &x in &map {
            if x >= map.len() || std::mem::replace(&mut seen[x], true) {
                return Err(MatchingError::InvalidPermutation(format!(
                    "{map:?} is not a bijection"
                )));
            }
        }
        Ok(Permutation(map))
    }

    pub fn from_one_indexed(map: &[usize]) -> Result<Self, MatchingError> {
        if map.contains(&0) {
            return Err(MatchingError::InvalidPermutation(
                "entries must be 1-indexed".into(),
            ));
        }
        Self::new(map.iter().map(|&x| x - 1).collect())
    }

    pub fn identity(m: usize) -> Self {
        Permutation((0..m).collect())
    }

    /// `x -> x + k mod m`.
    pub fn shift(m: usize, k: usize) -> Self {
        Permutation((0..m).map(|x| (x + k) % m).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ other`: `other` is applied first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn is_derangement(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i != x)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn to_one_indexed(&self) -> Vec<usize> {
        self.0.iter().map(|&x| x + 1).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|x| (x + 1).to_string()).collect();
        write!(f, "[{}]", s.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingInstance {
    m: usize,
    m1: usize,
    m2: usize,
    pi: Vec<Permutation>,
}

impl MatchingInstance {
    pub fn new(
        m: usize,
        m1: usize,
        m2: usize,
        table: Vec<Vec<Permutation>>,
    ) -> Result<Self, MatchingError> {
        if m == 0 || m1 == 0 || m2 == 0 {
            return Err(MatchingError::InvalidInstance(
                "m, m1 and m2 must be positive".into(),
            ));
        }
        if table.len() != m1 || table.iter().any(|r| r.len() != m2) {
            return Err(MatchingError::InvalidInstance(format!(
                "table must be {m1}x{m2}"
            )));
        }
        let pi: Vec<Permutation> = table.into_iter().flatten().collect();
        if let Some(p) = pi.iter().find(|p| p.len() != m) {
            return Err(MatchingError::InvalidInstance(format!(
                "permutation {p} is not on {m} points"
            )));
        }
        Ok(MatchingInstance { m, m1, m2, pi })
    }

    /// Table of shifts `pi[a][b] = x -> x + shifts[a][b] mod m`.
    pub fn from_shift_table(m: usize, shifts: &[Vec<usize>]) -> Result<Self, MatchingError> {
        let table = shifts
            .iter()
            .map(|row| row.iter().map(|&k| Permutation::shift(m, k % m)).collect())
            .collect();
        Self::new(m, shifts.len(), shifts.first().map_or(0, Vec::len), table)
    }

    /// Binary side information, quaternary messages, shifts `z = 2 w1p + w2p`.
    pub fn cb1() -> Self {
        Self::from_shift_table(4, &[vec![0, 1], vec![2, 3]]).expect("valid table")
    }

    /// Like [`cb1`](Self::cb1) with the second row of shifts exchanged.
    pub fn cb2() -> Self {
        Self::from_shift_table(4, &[vec![0, 1], vec![3, 2]]).expect("valid table")
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn m1(&self) -> usize {
        self.m1
    }
    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn pi(&self, row: usize, col: usize) -> &Permutation {
        &self.pi[row * self.m2 + col]
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> {
        let m2 = self.m2;
        (0..self.m1 * m2).map(move |k| (k / m2, k % m2))
    }

    /// Exact H(w1, w2) in bits.
    pub fn h_w1w2_bits(&self) -> f64 {
        let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for p in &self.pi {
            for x in 0..self.m {
                *counts.entry((x, p.apply(x))).or_insert(0) += 1;
            }
        }
        let total = (self.m * self.m1 * self.m2) as f64;
        let sum: f64 = counts.values().map(|&c| c as f64 * (c as f64).log2()).sum();
        total.log2() - sum / total
    }
}

/// Alternating closed path on the grid: odd steps stay in a row, even steps stay in a column.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridCycle {
    cells: Vec<Cell>,
}

impl GridCycle {
    pub fn new(cells: Vec<Cell>, m1: usize, m2: usize) -> Result<Self, MatchingError> {
        let n = cells.len();
        if n < 4 || !n.is_multiple_of(2) {
            return Err(MatchingError::InvalidCycle(format!(
                "length {n} is not an even number >= 4"
            )));
        }
        if let Some(c) = cells.iter().find(|c| c.0 >= m1 || c.1 >= m2) {
            return Err(MatchingError::InvalidCycle(format!(
                "cell {c:?} outside the {m1}x{m2} grid"
            )));
        }
        for i in 0..n {
            let (a, b) = (cells[i], cells[(i + 1) % n]);
            let ok = if i % 2 == 0 {
                a.0 == b.0 && a.1 != b.1
            } else {
                a.1 == b.1 && a.0 != b.0
            };
            if !ok {
                return Err(MatchingError::InvalidCycle(format!(
                    "step {} from {:?} to {:?} must change only the {}",
                    i + 1,
                    a,
                    b,
                    if i % 2 == 0 { "column" } else { "row" }
                )));
            }
        }
        Ok(GridCycle { cells })
    }

    /// Build from 1-indexed `(row, col)` pairs.
    pub fn from_one_indexed(cells: &[Cell], m1: usize, m2: usize) -> Result<Self, MatchingError> {
        if cells.iter().any(|c| c.0 == 0 || c.1 == 0) {
            return Err(MatchingError::InvalidCycle(
                "cells must be 1-indexed".into(),
            ));
        }
        Self::new(cells.iter().map(|&(a, b)| (a - 1, b - 1)).collect(), m1, m2)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The same closed path traversed backwards.
    pub fn reversed(&self) -> GridCycle {
        GridCycle {
            cells: self.cells.iter().rev().copied().collect(),
        }
    }
}

impl fmt::Display for GridCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in &self.cells {
            write!(f, "({},{}) <-> ", a + 1, b + 1)?;
        }
        let (a, b) = self.cells[0];
        write!(f, "({},{})", a + 1, b + 1)
    }
}

/// `pi_{c1} pi_{c2}^-1 pi_{c3} ... pi_{cN}^-1`, rightmost applied first.
pub fn induced_permutation(
    inst: &MatchingInstance,
    cycle: &GridCycle,
) -> Result<Permutation, MatchingError> {
    let cycle = GridCycle::new(cycle.cells.clone(), inst.m1, inst.m2)?;
    let mut acc = Permutation::identity(inst.m);
    for (i, &(a, b)) in cycle.cells.iter().enumerate() {
        let p = inst.pi(a, b);
        acc = if i % 2 == 0 {
            acc.compose(p)
        } else {
            acc.compose(&p.inverse())
        };
    }
    Ok(acc)
}

/// Visit every cycle whose cells all satisfy `allowed`, once each.
///
/// Each cycle is reported starting at its smallest cell (row-major) with a
/// row step first, which fixes both its rotation and its direction. Returns the
/// number of cycles visited.
pub fn for_each_cycle<F, V>(
    m1: usize,
    m2: usize,
    allowed: F,
    cap: usize,
    mut visit: V,
) -> Result<usize, MatchingError>
where
    F: Fn(Cell) -> bool,
    V: FnMut(&GridCycle) -> ControlFlow<()>,
{
    let mut count = 0usize;
    let mut rows = vec![false; m1];
    let mut cols = vec![false; m2];
    let mut path: Vec<Cell> = Vec::new();

    // Each row and column is entered at most once; the last row step may land
    // back in the starting column, which closes the cycle.
    #[allow(clippy::too_many_arguments)]
    fn dfs<F: Fn(Cell) -> bool, V: FnMut(&GridCycle) -> ControlFlow<()>>(
        m1: usize,
        m2: usize,
        allowed: &F,
        rows: &mut [bool],
        cols: &mut [bool],
        path: &mut Vec<Cell>,
        count: &mut usize,
        cap: usize,
        visit: &mut V,
    ) -> Result<ControlFlow<()>, MatchingError> {
        let cur = *path.last().unwrap();
        let first = path[0];
        let start = first.0 * m2 + first.1;
        if path.len() % 2 == 1 {
            for b in (0..m2).filter(|&b| b != cur.1) {
                let c = (cur.0, b);
                if c.0 * m2 + c.1 <= start || !allowed(c) {
                    continue;
                }
                if b == first.1 {
                    if path.len() >= 3 {
                        path.push(c);
                        *count += 1;
                        if *count > cap {
                            return Err(MatchingError::CycleBudgetExceeded(cap));
                        }
                        let flow = visit(&GridCycle {
                            cells: path.clone(),
                        });
                        path.pop();
                        if flow.is_break() {
                            return Ok(flow);
                        }
                    }
                    continue;
                }
                if cols[b] {
                    continue;
                }
                cols[b] = true;
                path.push(c);
                let flow = dfs(m1, m2, allowed, rows, cols, path, count, cap, visit)?;
                path.pop();
                cols[b] = false;
                if flow.is_break() {
                    return Ok(flow);
                }
            }
        } else {
            for a in 0..m1 {
                let c = (a, cur.1);
                if rows[a] || c.0 * m2 + c.1 <= start || !allowed(c) {
                    continue;
                }
                rows[a] = true;
                path.push(c);
                let flow = dfs(m1, m2, allowed, rows, cols, path, count, cap, visit)?;
                path.pop();
                rows[a] = false;
                if flow.is_break() {
                    return Ok(flow);
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    for a in 0..m1 {
        for b in 0..m2 {
            let s = (a, b);
            if !allowed(s) {
                continue;
            }
            rows[a] = true;
            cols[b] = true;
            path.push(s);
            let flow = dfs(
                m1, m2, &allowed, &mut rows, &mut cols, &mut path, &mut count, cap, &mut visit,
            )?;
            path.pop();
            rows[a] = false;
            cols[b] = false;
            if flow.is_break() {
                return Ok(count);
            }
        }
    }
    Ok(count)
}

/// All cycles of the `m1 x m2` grid in deterministic order.
pub fn enumerate_cycles(m1: usize, m2: usize, cap: usize) -> Result<Vec<GridCycle>, MatchingError> {
    let mut out = Vec::new();
    for_each_cycle(
        m1,
        m2,
        |_| true,
        cap,
        |c| {
            out.push(c.clone());
            ControlFlow::Continue(())
        },
    )?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureClass {
    Maximal,
    Minimal,
    Neither,
    NotMaximalUndetermined,
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructureClass::Maximal => "maximal",
            StructureClass::Minimal => "minimal",
            StructureClass::Neither => "neither",
            StructureClass::NotMaximalUndetermined => "not-maximal-undetermined",
        })
    }
}

/// Row maps `deltas` and column maps `gammas` with `gammas[b] ∘ deltas[a] = pi[a][b]` on a cell set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub deltas: Vec<Permutation>,
    pub gammas: Vec<Permutation>,
}

impl Factorization {
    pub fn holds_on(&self, inst: &MatchingInstance, cells: impl IntoIterator<Item = Cell>) -> bool {
        cells
            .into_iter()
            .all(|(a, b)| self.gammas[b].compose(&self.deltas[a]) == *inst.pi(a, b))
    }
}

/// Propagate `gammas[anchor_col] = id` along the cells, treated as edges between rows and columns.
///
/// Rows and columns not reached stay at the identity. On a cell set without
/// cycles the defining relation holds on every cell.
pub fn factor_on_cells(
    inst: &MatchingInstance,
    cells: &BTreeSet<Cell>,
    anchor_col: usize,
) -> Factorization {
    let m = inst.m;
    let mut deltas: Vec<Option<Permutation>> = vec![None; inst.m1];
    let mut gammas: Vec<Option<Permutation>> = vec![None; inst.m2];
    gammas[anchor_col] = Some(Permutation::identity(m));
    // true = column, false = row
    let mut queue = VecDeque::from([(true, anchor_col)]);
    while let Some((is_col, k)) = queue.pop_front() {
        for &(a, b) in cells {
            if is_col && b == k && deltas[a].is_none() {
                let g = gammas[b].as_ref().unwrap();
                deltas[a] = Some(g.inverse().compose(inst.pi(a, b)));
                queue.push_back((false, a));
            } else if !is_col && a == k && gammas[b].is_none() {
                let d = deltas[a].as_ref().unwrap();
                gammas[b] = Some(inst.pi(a, b).compose(&d.inverse()));
                queue.push_back((true, b));
            }
        }
    }
    Factorization {
        deltas: deltas
            .into_iter()
            .map(|d| d.unwrap_or_else(|| Permutation::identity(m)))
            .collect(),
        gammas: gammas
            .into_iter()
            .map(|g| g.unwrap_or_else(|| Permutation::identity(m)))
            .collect(),
    }
}

/// A factorization valid on the whole grid, if one exists.
pub fn maximal_factorization(inst: &MatchingInstance) -> Option<Factorization> {
    let f = factor_on_cells(inst, &standard_bullet_set(inst.m1, inst.m2).cells, 0);
    f.holds_on(inst, inst.cells()).then_some(f)
}

pub fn classify(inst: &MatchingInstance, cap: usize) -> StructureClass {
    if maximal_factorization(inst).is_some() {
        return StructureClass::Maximal;
    }
    let mut all_derangements = true;
    let res = for_each_cycle(
        inst.m1,
        inst.m2,
        |_| true,
        cap,
        |c| {
            let p = induced_permutation(inst, c).expect("enumerated cycles are valid");
            if p.is_derangement() {
                ControlFlow::Continue(())
            } else {
                all_derangements = false;
                ControlFlow::Break(())
            }
        },
    );
    match res {
        Err(_) => StructureClass::NotMaximalUndetermined,
        Ok(_) if all_derangements => StructureClass::Minimal,
        Ok(_) => StructureClass::Neither,
    }
}

/// A translated bullet set: the standard pattern shifted by `(z1, z2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BulletSet {
    pub m1: usize,
    pub m2: usize,
    pub z1: usize,
    pub z2: usize,
    pub cells: BTreeSet<Cell>,
}

impl BulletSet {
    pub fn contains(&self, cell: Cell) -> bool {
        self.cells.contains(&cell)
    }

    pub fn translate(&self, z1: usize, z2: usize) -> BulletSet {
        BulletSet {
            m1: self.m1,
            m2: self.m2,
            z1: (self.z1 + z1) % self.m1,
            z2: (self.z2 + z2) % self.m2,
            cells: self
                .cells
                .iter()
                .map(|&(a, b)| ((a + z1) % self.m1, (b + z2) % self.m2))
                .collect(),
        }
    }

    /// The image of the standard corner cell.
    pub fn anchor(&self) -> Cell {
        (self.z1, self.z2)
    }

    /// Complement within the grid.
    pub fn complement(&self) -> BTreeSet<Cell> {
        (0..self.m1)
            .flat_map(|a| (0..self.m2).map(move |b| (a, b)))
            .filter(|c| !self.cells.contains(c))
            .collect()
    }
}

impl fmt::Display for BulletSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in 0..self.m1 {
            let row: String = (0..self.m2)
                .map(|b| if self.contains((a, b)) { '•' } else { '∘' })
                .collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

/// First column plus the band `(a, a+1)`; for `m1 < m2` the transposed pattern.
pub fn standard_bullet_set(m1: usize, m2: usize) -> BulletSet {
    let cells: BTreeSet<Cell> = if m1 >= m2 {
        (0..m1)
            .map(|a| (a, 0))
            .chain((0..m2.saturating_sub(1)).map(|a| (a, a + 1)))
            .collect()
    } else {
        (0..m2)
            .map(|b| (0, b))
            .chain((0..m1 - 1).map(|b| (b + 1, b)))
            .collect()
    };
    BulletSet {
        m1,
        m2,
        z1: 0,
        z2: 0,
        cells,
    }
}

/// All `m1 * m2` translations, ordered by `(z1, z2)`.
pub fn all_translations(m1: usize, m2: usize) -> Vec<BulletSet> {
    let s = standard_bullet_set(m1, m2);
    (0..m1)
        .flat_map(|z1| (0..m2).map(move |z2| (z1, z2)))
        .map(|(z1, z2)| s.translate(z1, z2))
        .collect()
}

/// Translations containing `cell`.
pub fn acceptable_sets(m1: usize, m2: usize, cell: Cell) -> Vec<BulletSet> {
    all_translations(m1, m2)
        .into_iter()
        .filter(|s| s.contains(cell))
        .collect()
}

/// The one-symbol scheme for side information restricted to a bullet set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaGammaScheme {
    pub bullet: BulletSet,
    pub deltas: Vec<Permutation>,
    pub gammas: Vec<Permutation>,
}

pub fn build_delta_gamma(inst: &MatchingInstance, bs: &BulletSet) -> DeltaGammaScheme {
    let f = factor_on_cells(inst, &bs.cells, bs.anchor().1);
    DeltaGammaScheme {
        bullet: bs.clone(),
        deltas: f.deltas,
        gammas: f.gammas,
    }
}

impl DeltaGammaScheme {
    pub fn encode_bullet(&self, w1p: usize, w1: usize) -> usize {
        self.deltas[w1p].apply(w1)
    }

    pub fn decode_user1(&self, s: usize, w1p: usize) -> usize {
        self.deltas[w1p].inverse().apply(s)
    }

    pub fn decode_user2(&self, s: usize, w2p: usize) -> usize {
        self.gammas[w2p].apply(s)
    }

    pub fn satisfies_invariant(&self, inst: &MatchingInstance) -> bool {
        Factorization {
            deltas: self.deltas.clone(),
            gammas: self.gammas.clone(),
        }
        .holds_on(inst, self.bullet.cells.iter().copied())
    }

    /// Exhaustive round trip over the given cells and every message value.
    pub fn round_trips_on(
        &self,
        inst: &MatchingInstance,
        cells: impl IntoIterator<Item = Cell>,
    ) -> bool {
        cells.into_iter().all(|(a, b)| {
            (0..inst.m).all(|w1| {
                let s = self.encode_bullet(a, w1);
                self.decode_user1(s, a) == w1 && self.decode_user2(s, b) == inst.pi(a, b).apply(w1)
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingBounds {
    pub class: StructureClass,
    pub hstar_lb_bits: f64,
    pub hstar_ub_bits: f64,
    /// `2 log2 m / hstar_ub_bits`.
    pub capacity_lb: f64,
    pub capacity_ub: f64,
    pub tight: bool,
    /// `log2(m1 m2) - log2(m1 + m2 - 1)`.
    pub gap_bits: f64,
    pub h_w1w2_bits: f64,
    /// Bounds recomputed with the exact H(w1, w2) as numerator.
    pub capacity_lb_actual: f64,
    pub capacity_ub_actual: f64,
    /// Optimal normalized cost when the class determines it.
    pub hstar_bits: Option<f64>,
}

pub fn bounds(inst: &MatchingInstance, cap: usize) -> MatchingBounds {
    let lm = (inst.m as f64).log2();
    let gap = ((inst.m1 * inst.m2) as f64).log2() - ((inst.m1 + inst.m2 - 1) as f64).log2();
    let lb = lm;
    let ub = lm + gap;
    let class = classify(inst, cap);
    let hstar = match class {
        StructureClass::Maximal => Some(lb),
        StructureClass::Minimal => Some(ub),
        _ => None,
    };
    let h = inst.h_w1w2_bits();
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::NAN };
    MatchingBounds {
        class,
        hstar_lb_bits: lb,
        hstar_ub_bits: ub,
        capacity_lb: ratio(2.0 * lm, ub),
        capacity_ub: 2.0,
        tight: hstar.is_some(),
        gap_bits: gap,
        h_w1w2_bits: h,
        capacity_lb_actual: ratio(h, ub),
        capacity_ub_actual: ratio(h, lb),
        hstar_bits: hstar,
    }
}

/// Single-shot scheme for 4x3 grids: a selector bit picks one of two complementary cell sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme4x3 {
    pub bullet_cells: BTreeSet<Cell>,
    pub circle_cells: BTreeSet<Cell>,
    pub bullet: Factorization,
    pub circle: Factorization,
    m: usize,
}

/// Encoded symbol: selector (false for the bullet set) and the permuted message.
pub type Symbol4x3 = (bool, usize);

pub fn scheme_4x3(inst: &MatchingInstance) -> Result<Scheme4x3, MatchingError> {
    if (inst.m1, inst.m2) != (4, 3) {
        return Err(MatchingError::WrongShape(inst.m1, inst.m2));
    }
    let bullet_cells: BTreeSet<Cell> = [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 2)].into();
    let circle_cells: BTreeSet<Cell> = inst.cells().filter(|c| !bullet_cells.contains(c)).collect();
    Ok(Scheme4x3 {
        bullet: factor_on_cells(inst, &bullet_cells, 0),
        circle: factor_on_cells(inst, &circle_cells, 0),
        bullet_cells,
        circle_cells,
        m: inst.m,
    })
}

impl Scheme4x3 {
    fn side(&self, selector: bool) -> &Factorization {
        if selector {
            &self.circle
        } else {
            &self.bullet
        }
    }

    pub fn encode(&self, w1p: usize, w2p: usize, w1: usize) -> Symbol4x3 {
        let sel = !self.bullet_cells.contains(&(w1p, w2p));
        (sel, self.side(sel).deltas[w1p].apply(w1))
    }

    pub fn decode_user1(&self, s: Symbol4x3, w1p: usize) -> usize {
        self.side(s.0).deltas[w1p].inverse().apply(s.1)
    }

    pub fn decode_user2(&self, s: Symbol4x3, w2p: usize) -> usize {
        self.side(s.0).gammas[w2p].apply(s.1)
    }

    pub fn cost_bits(&self) -> f64 {
        (self.m as f64).log2() + 1.0
    }

    /// Decode check over all `12 m` inputs.
    pub fn verify_exhaustive(&self, inst: &MatchingInstance) -> bool {
        inst.cells().all(|(a, b)| {
            (0..inst.m).all(|w1| {
                let s = self.encode(a, b, w1);
                self.decode_user1(s, a) == w1 && self.decode_user2(s, b) == inst.pi(a, b).apply(w1)
            })
        })
    }
}

/// Side-information cells consistent with one broadcast value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibleSet {
    pub symbol: String,
    /// 1-indexed cells.
    pub cells: Vec<Cell>,
    pub has_derangement_cycle: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub class: StructureClass,
    pub sets: Vec<FeasibleSet>,
    pub max_set_size: usize,
    pub size_bound: usize,
    pub decodable_user1: bool,
    pub decodable_user2: bool,
    pub violations: Vec<String>,
}

impl FeasibilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audit a deterministic single-shot encoder `(w1p, w2p, w1) -> symbol`.
///
/// Inputs mapped to `None` are outside the encoder's domain and ignored.
pub fn feasible_set_check<S, E>(
    inst: &MatchingInstance,
    encoder: E,
    cap: usize,
) -> FeasibilityReport
where
    S: Ord + Clone + fmt::Debug,
    E: Fn(usize, usize, usize) -> Option<S>,
{
    let class = classify(inst, cap);
    let mut by_symbol: BTreeMap<S, BTreeSet<Cell>> = BTreeMap::new();
    // (symbol, w1p) -> w1 and (symbol, w2p) -> w2 must be functions
    let mut dec1: BTreeMap<(S, usize), BTreeSet<usize>> = BTreeMap::new();
    let mut dec2: BTreeMap<(S, usize), BTreeSet<usize>> = BTreeMap::new();
    for (a, b) in inst.cells() {
        for w1 in 0..inst.m {
            let Some(s) = encoder(a, b, w1) else { continue };
            by_symbol.entry(s.clone()).or_default().insert((a, b));
            dec1.entry((s.clone(), a)).or_default().insert(w1);
            dec2.entry((s, b))
                .or_default()
                .insert(inst.pi(a, b).apply(w1));
        }
    }
    let decodable_user1 = dec1.values().all(|v| v.len() == 1);
    let decodable_user2 = dec2.values().all(|v| v.len() == 1);
    let mut violations = Vec::new();
    if !decodable_user1 {
        violations.push("user 1 cannot decode for some broadcast value".to_string());
    }
    if !decodable_user2 {
        violations.push("user 2 cannot decode for some broadcast value".to_string());
    }
    let size_bound = inst.m1 + inst.m2 - 1;
    let mut sets = Vec::new();
    for (s, cells) in &by_symbol {
        let mut bad = false;
        let res = for_each_cycle(
            inst.m1,
            inst.m2,
            |c| cells.contains(&c),
            cap,
            |c| {
                if induced_permutation(inst, c)
                    .expect("valid cycle")
                    .is_derangement()
                {
                    bad = true;
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        );
        if let Err(e) = res {
            violations.push(format!("symbol {s:?}: {e}"));
        }
        if bad {
            violations.push(format!(
                "symbol {s:?}: feasible set contains a derangement cycle"
            ));
        }
        if class == StructureClass::Minimal && cells.len() > size_bound {
            violations.push(format!(
                "symbol {s:?}: {} feasible cells exceed the bound {size_bound}",
                cells.len()
            ));
        }
        sets.push(FeasibleSet {
            symbol: format!("{s:?}"),
            cells: cells.iter().map(|&(a, b)| (a + 1, b + 1)).collect(),
            has_derangement_cycle: bad,
        });
    }
    FeasibilityReport {
        class,
        max_set_size: by_symbol.values().map(BTreeSet::len).max().unwrap_or(0),
        sets,
        size_bound,
        decodable_user1,
        decodable_user2,
        violations,
    }
}

/// The uniform joint distribution over `(w1, w1p, pi(w1), w2p)`; labels are 1-indexed.
pub fn to_general(inst: &MatchingInstance) -> Result<GeneralCbInstance, MatchingError> {
    let n = inst.m * inst.m1 * inst.m2;
    if n > GENERAL_ATOM_LIMIT {
        return Err(MatchingError::TooLarge(format!(
            "{n} atoms exceed {GENERAL_ATOM_LIMIT}"
        )));
    }
    let labels = |k: usize| (1..=k).map(|i| i.to_string()).collect::<Vec<_>>();
    let prob = BigRational::new(BigInt::one(), BigInt::from(n));
    let atoms = inst
        .cells()
        .flat_map(|(a, b)| {
            let prob = prob.clone();
            (0..inst.m).map(move |x| Atom {
                values: [x, a, inst.pi(a, b).apply(x), b],
                prob: prob.clone(),
            })
        })
        .collect();
    GeneralCbInstance::new(
        [
            labels(inst.m),
            labels(inst.m1),
            labels(inst.m),
            labels(inst.m2),
        ],
        atoms,
    )
    .map_err(|e| MatchingError::InvalidInstance(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{W1, W1P, W2, W2P};

    fn four_cycle() -> GridCycle {
        GridCycle::from_one_indexed(&[(1, 1), (1, 2), (2, 2), (2, 1)], 2, 2).unwrap()
    }

    #[test]
    fn permutation_basics() {
        let p = Permutation::from_one_indexed(&[2, 3, 1]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        assert!(p.is_derangement());
        assert_eq!(p.to_string(), "[2 3 1]");
        assert!(Permutation::from_one_indexed(&[1, 1, 2]).is_err());
        let s = Permutation::shift(4, 1);
        // rightmost applied first
        let q = Permutation::new(vec![1, 0, 2, 3]).unwrap();
        assert_eq!(q.compose(&s).apply(0), 0);
        assert_eq!(s.compose(&q).apply(0), 2);
    }

    #[test]
    fn induced_on_small_tables() {
        let id = MatchingInstance::from_shift_table(3, &[vec![0, 0], vec![0, 0]]).unwrap();
        assert!(induced_permutation(&id, &four_cycle())
            .unwrap()
            .is_identity());
        assert!(induced_permutation(&MatchingInstance::cb1(), &four_cycle())
            .unwrap()
            .is_identity());
        assert_eq!(
            induced_permutation(&MatchingInstance::cb2(), &four_cycle()).unwrap(),
            Permutation::shift(4, 2)
        );
    }

    #[test]
    fn cycle_validation() {
        assert!(GridCycle::from_one_indexed(&[(1, 1), (2, 1), (2, 2), (1, 2)], 2, 2).is_err());
        assert!(GridCycle::from_one_indexed(&[(1, 1), (1, 2)], 2, 2).is_err());
        assert!(GridCycle::from_one_indexed(&[(1, 1), (1, 2), (3, 2), (3, 1)], 2, 2).is_err());
    }

    #[test]
    fn cycle_counts() {
        assert_eq!(enumerate_cycles(2, 2, DEFAULT_CYCLE_CAP).unwrap().len(), 1);
        assert_eq!(enumerate_cycles(3, 2, DEFAULT_CYCLE_CAP).unwrap().len(), 3);
        assert!(enumerate_cycles(1, 5, DEFAULT_CYCLE_CAP)
            .unwrap()
            .is_empty());
        assert!(enumerate_cycles(4, 1, DEFAULT_CYCLE_CAP)
            .unwrap()
            .is_empty());
        assert_eq!(
            enumerate_cycles(3, 3, 2),
            Err(MatchingError::CycleBudgetExceeded(2))
        );
    }

    #[test]
    fn classification_of_small_tables() {
        assert_eq!(
            classify(&MatchingInstance::cb1(), DEFAULT_CYCLE_CAP),
            StructureClass::Maximal
        );
        assert_eq!(
            classify(&MatchingInstance::cb2(), DEFAULT_CYCLE_CAP),
            StructureClass::Minimal
        );
        let swap = Permutation::from_one_indexed(&[2, 1, 3, 4]).unwrap();
        let id = Permutation::identity(4);
        let inst =
            MatchingInstance::new(4, 2, 2, vec![vec![id.clone(), id.clone()], vec![id, swap]])
                .unwrap();
        assert_eq!(classify(&inst, DEFAULT_CYCLE_CAP), StructureClass::Neither);
    }

    #[test]
    fn bullet_sets() {
        let s = standard_bullet_set(3, 2);
        assert_eq!(s.cells, [(0, 0), (1, 0), (2, 0), (0, 1)].into());
        let acc = acceptable_sets(3, 2, (1, 0));
        let got: BTreeSet<BTreeSet<Cell>> = acc.iter().map(|b| b.cells.clone()).collect();
        let want: BTreeSet<BTreeSet<Cell>> = [
            [(0, 0), (1, 0), (2, 0), (0, 1)].into(),
            [(0, 0), (1, 0), (2, 0), (2, 1)].into(),
            [(0, 0), (1, 0), (2, 0), (1, 1)].into(),
            [(0, 1), (1, 0), (1, 1), (2, 1)].into(),
        ]
        .into();
        assert_eq!(got, want);
        assert_eq!(all_translations(1, 1).len(), 1);
        assert_eq!(standard_bullet_set(1, 1).cells, [(0, 0)].into());
        assert_eq!(standard_bullet_set(2, 5).cells.len(), 6);
    }

    #[test]
    fn delta_gamma_on_shift_tables() {
        let bs = standard_bullet_set(2, 2);
        let s1 = build_delta_gamma(&MatchingInstance::cb1(), &bs);
        assert_eq!(
            s1.deltas,
            vec![Permutation::shift(4, 0), Permutation::shift(4, 2)]
        );
        assert_eq!(
            s1.gammas,
            vec![Permutation::identity(4), Permutation::shift(4, 1)]
        );
        assert_eq!(
            s1.gammas[1].compose(&s1.deltas[1]),
            Permutation::shift(4, 3)
        );
        assert_eq!(s1.encode_bullet(1, 1), 3);
        assert_eq!(s1.decode_user2(3, 1), 0);
        let s2 = build_delta_gamma(&MatchingInstance::cb2(), &bs);
        assert_eq!(s2.deltas[1], Permutation::shift(4, 3));
        assert_eq!(s2.gammas[1], Permutation::shift(4, 1));
        assert!(s2.gammas[1].compose(&s2.deltas[1]).is_identity());
        assert!(s2.satisfies_invariant(&MatchingInstance::cb2()));
        assert!(!s2.round_trips_on(&MatchingInstance::cb2(), [(1, 1)]));
    }

    #[test]
    fn bounds_closed_forms() {
        let b = bounds(&MatchingInstance::cb2(), DEFAULT_CYCLE_CAP);
        assert_eq!(b.class, StructureClass::Minimal);
        assert!((b.hstar_ub_bits - (4.0 - 3f64.log2())).abs() < 1e-12);
        let b = bounds(&MatchingInstance::cb1(), DEFAULT_CYCLE_CAP);
        assert_eq!(b.hstar_bits, Some(2.0));
        let id = MatchingInstance::from_shift_table(5, &vec![vec![0; 3]; 4]).unwrap();
        assert_eq!(bounds(&id, DEFAULT_CYCLE_CAP).gap_bits, 1.0);
    }

    #[test]
    fn four_by_three_identity_uses_bullet_side() {
        let id = MatchingInstance::from_shift_table(3, &vec![vec![0; 3]; 4]).unwrap();
        let s = scheme_4x3(&id).unwrap();
        assert!(s.verify_exhaustive(&id));
        assert!(scheme_4x3(&MatchingInstance::cb1()).is_err());
    }

    #[test]
    fn feasibility_of_cb1_mod_four_encoder() {
        let inst = MatchingInstance::cb1();
        let rep = feasible_set_check(&inst, |a, _b, w1| Some((w1 + 2 * a) % 4), DEFAULT_CYCLE_CAP);
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!(rep.max_set_size, 4);
        let verbatim = feasible_set_check(&inst, |a, b, w1| Some((w1, a, b)), DEFAULT_CYCLE_CAP);
        assert!(verbatim.passed());
        assert_eq!(verbatim.max_set_size, 1);
    }

    #[test]
    fn general_view_of_cb1() {
        let g = to_general(&MatchingInstance::cb1()).unwrap();
        assert_eq!(g.atoms().len(), 16);
        assert!((g.entropy(W1P) - 1.0).abs() < 1e-12);
        assert!((g.entropy(W1 | W2 | W1P | W2P) - 4.0).abs() < 1e-12);
        let triv = MatchingInstance::from_shift_table(1, &[vec![0]]).unwrap();
        assert_eq!(to_general(&triv).unwrap().entropy(W1 | W2), 0.0);
    }
}
