//! Optimal linear schemes for linear computation broadcast.
//!
//! Each demand is split into a part recoverable from the pooled side
//! information (a), a part that is cross-dependent with the other demand (b)
//! and an independent remainder (c). The broadcast carries one combined
//! symbol stream per part.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::distributions::BoundsReport;
use crate::gf_linalg::{
    extend_basis, intersect_column_spaces, solve, FieldMatrix, LinalgError, PrimeField,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LcbError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("decomposition invariant violated: {0}")]
    DecompositionInvariantViolated(String),
    #[error("factorization failed: {0}")]
    FactorizationFailed(String),
    #[error("demands are already known from side information; nothing to broadcast")]
    DegenerateDemand,
    #[error("malformed scheme: {0}")]
    MalformedScheme(String),
}

/// `W1 = X^T V1`, `W1' = X^T V1p`, `W2 = X^T V2`, `W2' = X^T V2p` with `X` uniform on GF(p)^m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCbInstance {
    field: PrimeField,
    m: usize,
    v1: FieldMatrix,
    v1p: FieldMatrix,
    v2: FieldMatrix,
    v2p: FieldMatrix,
}

impl LinearCbInstance {
    pub fn new(
        field: PrimeField,
        m: usize,
        v1: FieldMatrix,
        v1p: FieldMatrix,
        v2: FieldMatrix,
        v2p: FieldMatrix,
    ) -> Result<Self, LinalgError> {
        for (name, v) in [("V1", &v1), ("V1p", &v1p), ("V2", &v2), ("V2p", &v2p)] {
            if v.field() != field {
                return Err(LinalgError::FieldMismatch(
                    field.modulus(),
                    v.field().modulus(),
                ));
            }
            if v.rows() != m {
                return Err(LinalgError::ShapeMismatch(format!(
                    "{name} has {} rows, expected {m}",
                    v.rows()
                )));
            }
        }
        Ok(LinearCbInstance {
            field,
            m,
            v1,
            v1p,
            v2,
            v2p,
        })
    }

    /// Build from integer column lists, reducing modulo `p`.
    pub fn from_columns(
        p: u64,
        m: usize,
        v1: &[Vec<i64>],
        v1p: &[Vec<i64>],
        v2: &[Vec<i64>],
        v2p: &[Vec<i64>],
    ) -> Result<Self, LinalgError> {
        let f = PrimeField::new(p)?;
        Self::new(
            f,
            m,
            FieldMatrix::from_columns(f, m, v1)?,
            FieldMatrix::from_columns(f, m, v1p)?,
            FieldMatrix::from_columns(f, m, v2)?,
            FieldMatrix::from_columns(f, m, v2p)?,
        )
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn v1(&self) -> &FieldMatrix {
        &self.v1
    }
    pub fn v1p(&self) -> &FieldMatrix {
        &self.v1p
    }
    pub fn v2(&self) -> &FieldMatrix {
        &self.v2
    }
    pub fn v2p(&self) -> &FieldMatrix {
        &self.v2p
    }

    /// The same instance with the users exchanged.
    pub fn swapped(&self) -> Self {
        LinearCbInstance {
            field: self.field,
            m: self.m,
            v1: self.v2.clone(),
            v1p: self.v2p.clone(),
            v2: self.v1.clone(),
            v2p: self.v1p.clone(),
        }
    }

    fn cat(&self, parts: &[&FieldMatrix]) -> FieldMatrix {
        FieldMatrix::hstack_all(self.field, self.m, parts).expect("instance matrices share shape")
    }

    /// rank([V1 V2]), i.e. H(W1, W2) in field symbols.
    pub fn demand_rank(&self) -> usize {
        self.cat(&[&self.v1, &self.v2]).rank()
    }

    /// The general converse in field symbols, evaluated through ranks.
    pub fn converse_symbols(&self) -> usize {
        let r = |parts: &[&FieldMatrix]| self.cat(parts).rank();
        let all = r(&[&self.v1, &self.v1p, &self.v2, &self.v2p]);
        let c1 = r(&[&self.v1, &self.v1p]) - self.v1p.rank() + all
            - r(&[&self.v1, &self.v1p, &self.v2p]);
        let c2 = r(&[&self.v2, &self.v2p]) - self.v2p.rank() + all
            - r(&[&self.v2, &self.v2p, &self.v1p]);
        c1.max(c2)
    }
}

/// Instance with each demand made independent of its own side information.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub instance: LinearCbInstance,
    /// `[reduced W1 | W1'] * reconstruct1 = W1`.
    pub reconstruct1: FieldMatrix,
    pub reconstruct2: FieldMatrix,
}

pub fn normalize(inst: &LinearCbInstance) -> Result<Normalized, LcbError> {
    let reduce =
        |v: &FieldMatrix, vp: &FieldMatrix| -> Result<(FieldMatrix, FieldMatrix), LcbError> {
            let shared = intersect_column_spaces(v, vp)?;
            let kept = extend_basis(&shared, v)?;
            let r = solve(&kept.hstack(vp)?, v)?;
            Ok((kept, r))
        };
    let (v1, r1) = reduce(&inst.v1, &inst.v1p)?;
    let (v2, r2) = reduce(&inst.v2, &inst.v2p)?;
    Ok(Normalized {
        instance: LinearCbInstance::new(
            inst.field,
            inst.m,
            v1,
            inst.v1p.clone(),
            v2,
            inst.v2p.clone(),
        )?,
        reconstruct1: r1,
        reconstruct2: r2,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub v1a: FieldMatrix,
    pub v1b: FieldMatrix,
    pub v1c: FieldMatrix,
    pub v2a: FieldMatrix,
    pub v2b: FieldMatrix,
    pub v2c: FieldMatrix,
}

impl Decomposition {
    pub fn n1a(&self) -> usize {
        self.v1a.cols()
    }
    pub fn n1b(&self) -> usize {
        self.v1b.cols()
    }
    pub fn n1c(&self) -> usize {
        self.v1c.cols()
    }
    pub fn n2a(&self) -> usize {
        self.v2a.cols()
    }
    pub fn n2b(&self) -> usize {
        self.v2b.cols()
    }
    pub fn n2c(&self) -> usize {
        self.v2c.cols()
    }

    pub fn swapped(&self) -> Self {
        Decomposition {
            v1a: self.v2a.clone(),
            v1b: self.v2b.clone(),
            v1c: self.v2c.clone(),
            v2a: self.v1a.clone(),
            v2b: self.v1b.clone(),
            v2c: self.v1c.clone(),
        }
    }

    /// Part sizes `[n1a, n1b, n1c, n2a, n2b, n2c]`.
    pub fn sizes(&self) -> [usize; 6] {
        [
            self.n1a(),
            self.n1b(),
            self.n1c(),
            self.n2a(),
            self.n2b(),
            self.n2c(),
        ]
    }
}

fn split_user(
    v: &FieldMatrix,
    pooled: &FieldMatrix,
    other: &FieldMatrix,
) -> Result<(FieldMatrix, FieldMatrix, FieldMatrix), LcbError> {
    let a = intersect_column_spaces(v, pooled)?;
    let ab_span = intersect_column_spaces(v, &pooled.hstack(other)?)?;
    let b = extend_basis(&a, &ab_span)?;
    let c = extend_basis(&a.hstack(&b)?, v)?;
    Ok((a, b, c))
}

/// Split each (normalized) demand into its a/b/c parts.
pub fn decompose(inst: &LinearCbInstance) -> Result<Decomposition, LcbError> {
    let pooled = inst.v1p.hstack(&inst.v2p)?;
    let (v1a, v1b, v1c) = split_user(&inst.v1, &pooled, &inst.v2)?;
    let (v2a, v2b, v2c) = split_user(&inst.v2, &pooled, &inst.v1)?;
    let dec = Decomposition {
        v1a,
        v1b,
        v1c,
        v2a,
        v2b,
        v2c,
    };
    check_decomposition(inst, &dec)?;
    Ok(dec)
}

/// Verify the defining span and dimension properties by rank arithmetic.
pub fn check_decomposition(inst: &LinearCbInstance, dec: &Decomposition) -> Result<(), LcbError> {
    let fail = |msg: String| Err(LcbError::DecompositionInvariantViolated(msg));
    let pooled = inst.v1p.hstack(&inst.v2p)?;
    let users = [
        ("1", &inst.v1, &inst.v2, &dec.v1a, &dec.v1b, &dec.v1c),
        ("2", &inst.v2, &inst.v1, &dec.v2a, &dec.v2b, &dec.v2c),
    ];
    for (u, v, other, a, b, c) in users {
        let ab = a.hstack(b)?;
        let abc = ab.hstack(c)?;
        let rv = v.rank();
        if abc.rank() != abc.cols() || abc.cols() != rv || v.hstack(&abc)?.rank() != rv {
            return fail(format!("parts of user {u} are not a basis of its demand"));
        }
        let dim_cap = |w: &FieldMatrix| -> Result<usize, LcbError> {
            Ok(rv + w.rank() - v.hstack(w)?.rank())
        };
        if pooled.hstack(a)?.rank() != pooled.rank() || a.cols() != dim_cap(&pooled)? {
            return fail(format!(
                "a-part of user {u} does not span the shared subspace"
            ));
        }
        let wider = pooled.hstack(other)?;
        if wider.hstack(&ab)?.rank() != wider.rank() || ab.cols() != dim_cap(&wider)? {
            return fail(format!(
                "a/b-parts of user {u} do not span the cross subspace"
            ));
        }
    }
    if dec.n1b() != dec.n2b() {
        return fail(format!("n1b={} differs from n2b={}", dec.n1b(), dec.n2b()));
    }
    Ok(())
}

/// `V1b = V1p M1p + V2p M2p + V2b M2b` with `M2b` invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorB {
    pub m1p: FieldMatrix,
    pub m2p: FieldMatrix,
    pub m2b: FieldMatrix,
    pub m2b_inv: FieldMatrix,
}

pub fn factor_b(dec: &Decomposition, inst: &LinearCbInstance) -> Result<FactorB, LcbError> {
    let basis = FieldMatrix::hstack_all(inst.field, inst.m, &[&inst.v1p, &inst.v2p, &dec.v2b])?;
    let x = solve(&basis, &dec.v1b)
        .map_err(|e| LcbError::FactorizationFailed(format!("V1b outside span: {e}")))?;
    let (n1p, n2p) = (inst.v1p.cols(), inst.v2p.cols());
    let m2b = x.row_range(n1p + n2p, x.rows());
    let m2b_inv = m2b
        .inverse()
        .ok_or_else(|| LcbError::FactorizationFailed("M2b is singular".into()))?;
    Ok(FactorB {
        m1p: x.row_range(0, n1p),
        m2p: x.row_range(n1p, n1p + n2p),
        m2b,
        m2b_inv,
    })
}

/// `V1a = V1p P1p + V2p P2p` and `[V2a | 0] = V1p Q1p + V2p Q2p`, both of width n1a.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorA {
    pub p1p: FieldMatrix,
    pub p2p: FieldMatrix,
    pub q1p: FieldMatrix,
    pub q2p: FieldMatrix,
}

pub fn factor_a(dec: &Decomposition, inst: &LinearCbInstance) -> Result<FactorA, LcbError> {
    if dec.n1a() < dec.n2a() {
        return Err(LcbError::FactorizationFailed(
            "orientation requires n1a >= n2a".into(),
        ));
    }
    let pooled = inst.v1p.hstack(&inst.v2p)?;
    let n1p = inst.v1p.cols();
    let p = solve(&pooled, &dec.v1a).map_err(|e| {
        LcbError::FactorizationFailed(format!("V1a outside pooled side information: {e}"))
    })?;
    let q = solve(&pooled, &dec.v2a.pad_columns(dec.n1a())).map_err(|e| {
        LcbError::FactorizationFailed(format!("V2a outside pooled side information: {e}"))
    })?;
    Ok(FactorA {
        p1p: p.row_range(0, n1p),
        p2p: p.row_range(n1p, pooled.cols()),
        q1p: q.row_range(0, n1p),
        q2p: q.row_range(n1p, pooled.cols()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Normal,
    Swapped,
}

/// A linear broadcast `S = X^T s_cols` with decoders `[S | Wi'] * decode_i = Wi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearScheme {
    pub field: PrimeField,
    pub m: usize,
    pub s_cols: FieldMatrix,
    pub segments: [usize; 3],
    pub decode1: FieldMatrix,
    pub decode2: FieldMatrix,
    pub cost_symbols: usize,
    pub orientation: Orientation,
}

fn columns_json(m: &FieldMatrix) -> Value {
    json!(m.columns())
}

fn matrix_from_json(
    field: PrimeField,
    rows: usize,
    v: &Value,
    name: &str,
) -> Result<FieldMatrix, LcbError> {
    let cols: Vec<Vec<i64>> = serde_json::from_value(v.clone())
        .map_err(|e| LcbError::MalformedScheme(format!("{name}: {e}")))?;
    if cols
        .iter()
        .flatten()
        .any(|&x| x < 0 || x >= field.modulus() as i64)
    {
        return Err(LcbError::MalformedScheme(format!(
            "{name}: entries must lie in [0, p)"
        )));
    }
    FieldMatrix::from_columns(field, rows, &cols)
        .map_err(|e| LcbError::MalformedScheme(format!("{name}: {e}")))
}

impl LinearScheme {
    pub fn to_json(&self) -> Value {
        json!({
            "field": self.field.modulus(),
            "m": self.m,
            "s_cols": columns_json(&self.s_cols),
            "segments": {"a": self.segments[0], "b": self.segments[1], "c": self.segments[2]},
            "decode1": columns_json(&self.decode1),
            "decode2": columns_json(&self.decode2),
            "cost_symbols": self.cost_symbols,
            "orientation": self.orientation,
        })
    }

    /// Parse a scheme; decoder row counts are taken from the instance's side information widths.
    pub fn from_json(v: &Value, inst: &LinearCbInstance) -> Result<Self, LcbError> {
        let get = |k: &str| {
            v.get(k)
                .ok_or_else(|| LcbError::MalformedScheme(format!("missing key {k:?}")))
        };
        let as_usize = |x: &Value, k: &str| {
            x.as_u64().map(|n| n as usize).ok_or_else(|| {
                LcbError::MalformedScheme(format!("{k} must be a non-negative integer"))
            })
        };
        let field = PrimeField::new(get("field")?.as_u64().unwrap_or(0))?;
        let m = as_usize(get("m")?, "m")?;
        if field != inst.field || m != inst.m {
            return Err(LcbError::MalformedScheme(
                "field or dimension differs from the instance".into(),
            ));
        }
        let s_cols = matrix_from_json(field, m, get("s_cols")?, "s_cols")?;
        let seg = get("segments")?;
        let segments = [
            as_usize(seg.get("a").unwrap_or(&Value::Null), "segments.a")?,
            as_usize(seg.get("b").unwrap_or(&Value::Null), "segments.b")?,
            as_usize(seg.get("c").unwrap_or(&Value::Null), "segments.c")?,
        ];
        let cost = as_usize(get("cost_symbols")?, "cost_symbols")?;
        let orientation: Orientation = serde_json::from_value(get("orientation")?.clone())
            .map_err(|e| LcbError::MalformedScheme(format!("orientation: {e}")))?;
        let decode1 = matrix_from_json(
            field,
            s_cols.cols() + inst.v1p.cols(),
            get("decode1")?,
            "decode1",
        )?;
        let decode2 = matrix_from_json(
            field,
            s_cols.cols() + inst.v2p.cols(),
            get("decode2")?,
            "decode2",
        )?;
        Ok(LinearScheme {
            field,
            m,
            s_cols,
            segments,
            decode1,
            decode2,
            cost_symbols: cost,
            orientation,
        })
    }
}

/// Everything produced by [`build_scheme`].
#[derive(Debug, Clone, PartialEq)]
pub struct LcbSolution {
    pub scheme: LinearScheme,
    /// Decomposition of the normalized instance in the orientation used by the scheme.
    pub decomposition: Decomposition,
    pub capacity: Ratio<u64>,
    pub converse_symbols: usize,
    pub bounds: BoundsReport,
}

/// Selection matrix placing `n` side-information symbols after `cost` broadcast symbols.
fn side_selector(field: PrimeField, cost: usize, n: usize) -> FieldMatrix {
    FieldMatrix::zeros(field, cost, n)
        .vstack(&FieldMatrix::identity(field, n))
        .expect("same width")
}

/// Place `block` at row offset `r0`, column offset `c0` of `out`.
fn put(out: &mut FieldMatrix, r0: usize, c0: usize, block: &FieldMatrix) {
    for r in 0..block.rows() {
        for c in 0..block.cols() {
            out.set(r0 + r, c0 + c, block.get(r, c));
        }
    }
}

pub fn build_scheme(inst: &LinearCbInstance) -> Result<LcbSolution, LcbError> {
    let f = inst.field;
    let norm = normalize(inst)?;
    let mut ni = norm.instance.clone();
    let mut dec = decompose(&ni)?;
    let (mut r1, mut r2) = (norm.reconstruct1.clone(), norm.reconstruct2.clone());
    let mut orientation = Orientation::Normal;
    if dec.n1a() < dec.n2a() {
        ni = ni.swapped();
        dec = dec.swapped();
        std::mem::swap(&mut r1, &mut r2);
        orientation = Orientation::Swapped;
    }
    let fb = factor_b(&dec, &ni)?;
    let fa = factor_a(&dec, &ni)?;
    let (n1a, nb, n1c, n2a, n2c) = (dec.n1a(), dec.n1b(), dec.n1c(), dec.n2a(), dec.n2c());
    let cost = n1a + nb + n1c + n2c;
    if cost == 0 {
        return Err(LcbError::DegenerateDemand);
    }

    let sa = ni.v1p.mul(&fa.q1p)?.add(&ni.v2p.mul(&fa.p2p)?)?;
    let sb = dec.v2b.mul(&fb.m2b)?.add(&ni.v2p.mul(&fb.m2p)?)?;
    let s_cols = FieldMatrix::hstack_all(f, ni.m, &[&sa, &sb, &dec.v1c, &dec.v2c])?;
    let (off_b, off_c) = (n1a, n1a + nb);

    // user 1 recovers [W1a W1b W1c] = [S | W1'] g1
    let n1p = ni.v1p.cols();
    let mut g1 = FieldMatrix::zeros(f, cost + n1p, n1a + nb + n1c);
    put(&mut g1, 0, 0, &FieldMatrix::identity(f, n1a));
    put(&mut g1, cost, 0, &fa.p1p.sub(&fa.q1p)?);
    put(&mut g1, off_b, n1a, &FieldMatrix::identity(f, nb));
    put(&mut g1, cost, n1a, &fb.m1p);
    put(&mut g1, off_c, n1a + nb, &FieldMatrix::identity(f, n1c));

    // user 2 recovers [W2a W2b W2c] = [S | W2'] g2
    let n2p = ni.v2p.cols();
    let mut g2 = FieldMatrix::zeros(f, cost + n2p, n2a + nb + n2c);
    put(
        &mut g2,
        0,
        0,
        &FieldMatrix::identity(f, n1a).column_range(0, n2a),
    );
    put(&mut g2, cost, 0, &fa.q2p.sub(&fa.p2p)?.column_range(0, n2a));
    put(&mut g2, off_b, n2a, &fb.m2b_inv);
    put(&mut g2, cost, n2a, &fb.m2p.mul(&fb.m2b_inv)?.neg());
    put(
        &mut g2,
        off_c + n1c,
        n2a + nb,
        &FieldMatrix::identity(f, n2c),
    );

    let to_demand = |g: &FieldMatrix,
                     parts: [&FieldMatrix; 3],
                     reduced: &FieldMatrix,
                     np: usize,
                     recon: &FieldMatrix|
     -> Result<FieldMatrix, LcbError> {
        let basis = FieldMatrix::hstack_all(f, ni.m, &parts)?;
        let coords = solve(&basis, reduced)?;
        let lifted = g.mul(&coords)?.hstack(&side_selector(f, cost, np))?;
        Ok(lifted.mul(recon)?)
    };
    let mut decode1 = to_demand(&g1, [&dec.v1a, &dec.v1b, &dec.v1c], &ni.v1, n1p, &r1)?;
    let mut decode2 = to_demand(&g2, [&dec.v2a, &dec.v2b, &dec.v2c], &ni.v2, n2p, &r2)?;
    if orientation == Orientation::Swapped {
        std::mem::swap(&mut decode1, &mut decode2);
    }

    let scheme = LinearScheme {
        field: f,
        m: ni.m,
        s_cols,
        segments: [n1a, nb, n1c + n2c],
        decode1,
        decode2,
        cost_symbols: cost,
        orientation,
    };
    let converse = inst.converse_symbols();
    let demand = inst.demand_rank();
    let bits = f.bits_per_symbol();
    let bounds = BoundsReport {
        h_w1w2: demand as f64 * bits,
        converse_cost_lb: converse as f64 * bits,
        capacity_ub: demand as f64 / converse as f64,
        achiev_cost_ub: None,
        capacity_lb: None,
        tight: false,
    }
    .with_achievability(cost as f64 * bits);
    Ok(LcbSolution {
        scheme,
        decomposition: dec,
        capacity: Ratio::new(demand as u64, cost as u64),
        converse_symbols: converse,
        bounds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<22} {}  {}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Check a scheme against an instance. Failures are reported, never raised.
pub fn verify_scheme(inst: &LinearCbInstance, scheme: &LinearScheme) -> VerifyReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.into(),
            passed,
            detail,
        })
    };
    let users = [
        ("user1", inst.v1(), inst.v1p(), &scheme.decode1),
        ("user2", inst.v2(), inst.v2p(), &scheme.decode2),
    ];
    for (u, v, vp, dec) in users {
        match scheme.s_cols.hstack(vp) {
            Ok(avail) => {
                let r = avail.rank();
                let missing = (0..v.cols())
                    .filter(|&c| {
                        avail
                            .hstack(&v.select_columns(&[c]))
                            .map_or(true, |x| x.rank() != r)
                    })
                    .count();
                push(
                    &format!("{u}_span"),
                    missing == 0,
                    format!(
                        "{missing} of {} demanded symbols outside the received span",
                        v.cols()
                    ),
                );
                let exact = avail.mul(dec).map(|w| w == *v).unwrap_or(false);
                push(
                    &format!("{u}_decode"),
                    exact,
                    format!("decode map is {}x{}", dec.rows(), dec.cols()),
                );
            }
            Err(e) => {
                push(&format!("{u}_span"), false, e.to_string());
                push(&format!("{u}_decode"), false, e.to_string());
            }
        }
    }
    let rank = scheme.s_cols.rank();
    push(
        "rank_equals_cost",
        rank == scheme.cost_symbols && scheme.s_cols.cols() == scheme.cost_symbols,
        format!(
            "rank {rank}, {} columns, cost {}",
            scheme.s_cols.cols(),
            scheme.cost_symbols
        ),
    );
    let converse = inst.converse_symbols();
    push(
        "cost_equals_converse",
        converse == scheme.cost_symbols,
        format!("converse {converse} symbols, cost {}", scheme.cost_symbols),
    );
    VerifyReport { checks }
}
