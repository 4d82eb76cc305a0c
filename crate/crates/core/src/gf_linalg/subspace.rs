use super::{FieldMatrix, LinalgError};

/// True iff `v` (a single column) lies in the column span of `a`.
pub fn in_span(v: &FieldMatrix, a: &FieldMatrix) -> Result<bool, LinalgError> {
    Ok(a.hstack(v)?.rank() == a.rank())
}

/// Some `X` with `A X = B`.
///
/// Back-substitution on the rref of `[A | B]`; free variables are set to zero.
pub fn solve(a: &FieldMatrix, b: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
    if a.rows() != b.rows() {
        return Err(LinalgError::ShapeMismatch(format!(
            "solve with {} rows against {} rows",
            a.rows(),
            b.rows()
        )));
    }
    let n = a.cols();
    let rref = a.hstack(b)?.rref();
    if rref.pivot_cols.iter().any(|&c| c >= n) {
        return Err(LinalgError::Inconsistent);
    }
    let mut x = FieldMatrix::zeros(a.field(), n, b.cols());
    for (r, &pc) in rref.pivot_cols.iter().enumerate() {
        for k in 0..b.cols() {
            x.set(pc, k, rref.matrix.get(r, n + k));
        }
    }
    Ok(x)
}

/// Columns of `a` at its rref pivot positions: a basis of span(a) drawn from `a` itself.
pub fn column_basis(a: &FieldMatrix) -> FieldMatrix {
    a.select_columns(&a.rref().pivot_cols)
}

/// Basis of span(a) ∩ span(b), from the kernel of `[a | b]`.
pub fn intersect_column_spaces(
    a: &FieldMatrix,
    b: &FieldMatrix,
) -> Result<FieldMatrix, LinalgError> {
    let k = a.hstack(b)?.kernel();
    let coeffs = k.row_range(0, a.cols());
    Ok(column_basis(&a.mul(&coeffs)?))
}

/// Columns to append to `inner` so that `[inner | added]` is a basis of span(outer).
///
/// Columns of `outer` are scanned left to right and kept when they raise the rank.
pub fn extend_basis(inner: &FieldMatrix, outer: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
    let outer_rank = outer.rank();
    if outer.hstack(inner)?.rank() != outer_rank {
        return Err(LinalgError::NotNested);
    }
    let inner_rank = inner.rank();
    if inner_rank != inner.cols() {
        return Err(LinalgError::ShapeMismatch(
            "inner columns are dependent".into(),
        ));
    }
    let mut kept = Vec::new();
    let mut acc = inner.clone();
    let mut rank = inner_rank;
    for c in 0..outer.cols() {
        if rank == outer_rank {
            break;
        }
        let cand = acc.hstack(&outer.select_columns(&[c]))?;
        let r = cand.rank();
        if r > rank {
            acc = cand;
            rank = r;
            kept.push(c);
        }
    }
    Ok(outer.select_columns(&kept))
}
