//! Exact joint distributions over `(w1, w1p, w2, w2p)` and Shannon quantities.
//!
//! Variable subsets are 4-bit masks in the fixed order `w1, w1p, w2, w2p`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lcb::LinearCbInstance;

pub const W1: u8 = 1;
pub const W1P: u8 = 2;
pub const W2: u8 = 4;
pub const W2P: u8 = 8;
pub const ALL: u8 = 15;

pub const VAR_NAMES: [&str; 4] = ["w1", "w1p", "w2", "w2p"];

/// Entropy comparisons use this absolute tolerance.
pub const TOL: f64 = 1e-9;

/// Largest `p^m` enumerated by [`from_linear`].
pub const LINEAR_ENUMERATION_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistError {
    #[error("invalid distribution: {0}")]
    Invariant(String),
    #[error(
        "demands are determined by side information; broadcast cost is 0 and capacity is undefined"
    )]
    DegenerateDemand,
    #[error("instance too large: {0}")]
    TooLarge(String),
}

/// Comma-separated variable names of a subset mask.
pub fn subset_name(mask: u8) -> String {
    (0..4)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| VAR_NAMES[i])
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    /// Indices into the four alphabets, in variable order.
    pub values: [usize; 4],
    pub prob: BigRational,
}

/// A finite joint distribution of the four variables with exact rational weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralCbInstance {
    alphabets: [Vec<String>; 4],
    atoms: Vec<Atom>,
}

impl GeneralCbInstance {
    /// Validates positivity, total mass 1, distinct tuples and full alphabet usage.
    pub fn new(alphabets: [Vec<String>; 4], atoms: Vec<Atom>) -> Result<Self, DistError> {
        for (v, alpha) in alphabets.iter().enumerate() {
            if alpha.is_empty() {
                return Err(DistError::Invariant(format!(
                    "alphabet {} is empty",
                    VAR_NAMES[v]
                )));
            }
            let mut seen = alpha.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != alpha.len() {
                return Err(DistError::Invariant(format!(
                    "alphabet {} has repeated labels",
                    VAR_NAMES[v]
                )));
            }
        }
        let mut total = BigRational::zero();
        let mut tuples = std::collections::BTreeSet::new();
        let mut used = [
            vec![false; alphabets[0].len()],
            vec![false; alphabets[1].len()],
            vec![false; alphabets[2].len()],
            vec![false; alphabets[3].len()],
        ];
        for (k, atom) in atoms.iter().enumerate() {
            if !atom.prob.is_positive() {
                return Err(DistError::Invariant(format!(
                    "atom {k} has non-positive probability"
                )));
            }
            for v in 0..4 {
                let idx = atom.values[v];
                if idx >= alphabets[v].len() {
                    return Err(DistError::Invariant(format!(
                        "atom {k} uses {} index {idx} outside its alphabet",
                        VAR_NAMES[v]
                    )));
                }
                used[v][idx] = true;
            }
            if !tuples.insert(atom.values) {
                return Err(DistError::Invariant(format!(
                    "atom {k} repeats an earlier tuple"
                )));
            }
            total += &atom.prob;
        }
        if !total.is_one() {
            return Err(DistError::Invariant(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        for v in 0..4 {
            if let Some(i) = used[v].iter().position(|u| !u) {
                return Err(DistError::Invariant(format!(
                    "label {:?} of {} never occurs in the support",
                    alphabets[v][i], VAR_NAMES[v]
                )));
            }
        }
        Ok(GeneralCbInstance { alphabets, atoms })
    }

    /// Uniform distribution over the given tuples of labels.
    pub fn uniform_from_labels(tuples: &[[String; 4]]) -> Result<Self, DistError> {
        let mut alphabets: [Vec<String>; 4] = Default::default();
        for t in tuples {
            for v in 0..4 {
                if !alphabets[v].contains(&t[v]) {
                    alphabets[v].push(t[v].clone());
                }
            }
        }
        let p = BigRational::new(BigInt::one(), BigInt::from(tuples.len()));
        let atoms = tuples
            .iter()
            .map(|t| Atom {
                values: std::array::from_fn(|v| {
                    alphabets[v].iter().position(|a| *a == t[v]).unwrap()
                }),
                prob: p.clone(),
            })
            .collect();
        Self::new(alphabets, atoms)
    }

    pub fn alphabets(&self) -> &[Vec<String>; 4] {
        &self.alphabets
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Largest per-variable alphabet size in bits.
    pub fn ell_max(&self) -> f64 {
        self.alphabets
            .iter()
            .map(|a| (a.len() as f64).log2())
            .fold(0.0, f64::max)
    }

    fn key(values: &[usize; 4], mask: u8) -> [usize; 4] {
        std::array::from_fn(|v| {
            if mask & (1 << v) != 0 {
                values[v]
            } else {
                usize::MAX
            }
        })
    }

    /// Exact marginal over the variables in `mask`.
    pub fn marginal(&self, mask: u8) -> BTreeMap<[usize; 4], BigRational> {
        let mut out: BTreeMap<[usize; 4], BigRational> = BTreeMap::new();
        for a in &self.atoms {
            *out.entry(Self::key(&a.values, mask))
                .or_insert_with(BigRational::zero) += &a.prob;
        }
        out
    }

    /// True iff the variables in `target` are a deterministic function of those in `given`.
    pub fn is_function_of(&self, target: u8, given: u8) -> bool {
        let mut seen: BTreeMap<[usize; 4], [usize; 4]> = BTreeMap::new();
        self.atoms.iter().all(|a| {
            let t = Self::key(&a.values, target);
            *seen.entry(Self::key(&a.values, given)).or_insert(t) == t
        })
    }

    /// H(mask) in bits.
    pub fn entropy(&self, mask: u8) -> f64 {
        self.marginal(mask).values().map(plogp).sum()
    }

    /// H(a | b) in bits.
    pub fn cond_entropy(&self, a: u8, b: u8) -> f64 {
        self.entropy(a | b) - self.entropy(b)
    }

    /// I(a; b | c) in bits.
    pub fn mutual_info(&self, a: u8, b: u8, c: u8) -> f64 {
        self.entropy(a | c) + self.entropy(b | c) - self.entropy(a | b | c) - self.entropy(c)
    }

    pub fn entropy_profile(&self) -> EntropyProfile {
        let mut h = [0.0; 16];
        for (mask, slot) in h.iter_mut().enumerate().skip(1) {
            *slot = self.entropy(mask as u8);
        }
        EntropyProfile { h }
    }
}

fn plogp(p: &BigRational) -> f64 {
    // log2 of numerator and denominator separately keeps precision for tiny masses
    let q = p.to_f64().unwrap_or(0.0);
    if q <= 0.0 {
        return 0.0;
    }
    let l = log2_big(p.numer()) - log2_big(p.denom());
    -q * l
}

fn log2_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().unwrap().log2()
    } else {
        let shift = bits - 60;
        let top: BigInt = n >> shift;
        top.to_f64().unwrap().log2() + shift as f64
    }
}

impl fmt::Display for GeneralCbInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>10} {:>10} {:>10} {:>10}  p",
            "w1", "w1p", "w2", "w2p"
        )?;
        for a in &self.atoms {
            let l: Vec<&str> = (0..4)
                .map(|v| self.alphabets[v][a.values[v]].as_str())
                .collect();
            writeln!(
                f,
                "{:>10} {:>10} {:>10} {:>10}  {}",
                l[0], l[1], l[2], l[3], a.prob
            )?;
        }
        Ok(())
    }
}

/// Entropies of all 15 nonempty subsets, indexed by mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    h: [f64; 16],
}

impl EntropyProfile {
    pub fn get(&self, mask: u8) -> f64 {
        self.h[mask as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u8, f64)> + '_ {
        (1u8..16).map(move |m| (m, self.h[m as usize]))
    }

    pub fn max_abs_diff(&self, other: &EntropyProfile) -> f64 {
        (1..16)
            .map(|m| (self.h[m] - other.h[m]).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_monotone(&self, tol: f64) -> bool {
        (0..16).all(|a| (0..16).all(|b| a & b != a || self.h[a] <= self.h[b] + tol))
    }

    pub fn is_submodular(&self, tol: f64) -> bool {
        (0..16)
            .all(|a| (0..16).all(|b| self.h[a] + self.h[b] + tol >= self.h[a | b] + self.h[a & b]))
    }

    /// Subset names mapped to entropies.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.iter().map(|(m, h)| (subset_name(m), h)).collect()
    }
}

/// Converse and achievability figures for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub h_w1w2: f64,
    pub converse_cost_lb: f64,
    pub capacity_ub: f64,
    pub achiev_cost_ub: Option<f64>,
    pub capacity_lb: Option<f64>,
    pub tight: bool,
}

impl BoundsReport {
    /// Record an achievable cost; tightness holds when it meets the converse.
    pub fn with_achievability(mut self, cost: f64) -> Self {
        self.achiev_cost_ub = Some(cost);
        self.capacity_lb = Some(self.h_w1w2 / cost);
        self.tight = (cost - self.converse_cost_lb).abs() <= TOL;
        if self.tight {
            self.capacity_lb = Some(self.capacity_ub);
        }
        self
    }
}

/// The two-user converse:
/// `H(w1|w1p) + H(w2|w2p) - min(I(w1; w2,w2p | w1p), I(w2; w1,w1p | w2p))`,
/// never below `max(H(w1|w1p), H(w2|w2p))`.
pub fn converse_denominator(inst: &GeneralCbInstance) -> f64 {
    let h1 = inst.cond_entropy(W1, W1P);
    let h2 = inst.cond_entropy(W2, W2P);
    let i1 = inst.mutual_info(W1, W2 | W2P, W1P);
    let i2 = inst.mutual_info(W2, W1 | W1P, W2P);
    (h1 + h2 - i1.min(i2)).max(h1.max(h2))
}

pub fn converse_bound(inst: &GeneralCbInstance) -> Result<BoundsReport, DistError> {
    if inst.is_function_of(W1, W1P) && inst.is_function_of(W2, W2P) {
        return Err(DistError::DegenerateDemand);
    }
    let h = inst.entropy(W1 | W2);
    let d = converse_denominator(inst);
    Ok(BoundsReport {
        h_w1w2: h,
        converse_cost_lb: d,
        capacity_ub: h / d,
        achiev_cost_ub: None,
        capacity_lb: None,
        tight: false,
    })
}

/// Exact distribution of `(X^T V1, X^T V1p, X^T V2, X^T V2p)` for uniform `X`.
///
/// Labels are the symbol tuples written as `(a,b,...)`.
pub fn from_linear(lin: &LinearCbInstance) -> Result<GeneralCbInstance, DistError> {
    let p = lin.field().modulus() as u64;
    let m = lin.m();
    let total = u32::try_from(m)
        .ok()
        .and_then(|e| p.checked_pow(e))
        .filter(|&t| t <= LINEAR_ENUMERATION_LIMIT)
        .ok_or_else(|| {
            DistError::TooLarge(format!("{p}^{m} exceeds {LINEAR_ENUMERATION_LIMIT}"))
        })?;
    let mats = [lin.v1(), lin.v1p(), lin.v2(), lin.v2p()];
    let mut counts: BTreeMap<[Vec<u32>; 4], u64> = BTreeMap::new();
    let mut x = vec![0u32; m];
    for _ in 0..total {
        let tuple: [Vec<u32>; 4] = std::array::from_fn(|v| {
            let mat = mats[v];
            (0..mat.cols())
                .map(|c| {
                    (0..m).fold(0u64, |acc, r| {
                        (acc + x[r] as u64 * mat.get(r, c) as u64) % p
                    }) as u32
                })
                .collect()
        });
        *counts.entry(tuple).or_insert(0) += 1;
        for d in x.iter_mut() {
            *d += 1;
            if (*d as u64) < p {
                break;
            }
            *d = 0;
        }
    }
    let label = |v: &[u32]| {
        format!(
            "({})",
            v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
        )
    };
    let mut alphabets: [Vec<Vec<u32>>; 4] = Default::default();
    for t in counts.keys() {
        for v in 0..4 {
            alphabets[v].push(t[v].clone());
        }
    }
    for a in alphabets.iter_mut() {
        a.sort();
        a.dedup();
    }
    let denom = BigInt::from(total);
    let atoms = counts
        .iter()
        .map(|(t, &c)| Atom {
            values: std::array::from_fn(|v| alphabets[v].binary_search(&t[v]).unwrap()),
            prob: BigRational::new(BigInt::from(c), denom.clone()),
        })
        .collect();
    let labels = alphabets.map(|a| a.iter().map(|v| label(v)).collect());
    GeneralCbInstance::new(labels, atoms)
}
