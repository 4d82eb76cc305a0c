use std::fmt;

use super::{LinalgError, PrimeField};

/// A dense matrix over a prime field, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Result of Gauss-Jordan elimination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub matrix: FieldMatrix,
    pub pivot_cols: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }
}

impl FieldMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Build from row vectors; entries are reduced modulo p.
    pub fn from_rows(field: PrimeField, rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::ShapeMismatch("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&v| field.reduce(v)).collect();
        Ok(FieldMatrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Build an `m x cols.len()` matrix from column vectors; entries are reduced modulo p.
    pub fn from_columns(
        field: PrimeField,
        m: usize,
        cols: &[Vec<i64>],
    ) -> Result<Self, LinalgError> {
        let mut out = Self::zeros(field, m, cols.len());
        for (j, col) in cols.iter().enumerate() {
            if col.len() != m {
                return Err(LinalgError::ShapeMismatch(format!(
                    "column {j} has length {}, expected {m}",
                    col.len()
                )));
            }
            for (i, &v) in col.iter().enumerate() {
                out.data[i * out.cols + j] = field.reduce(v);
            }
        }
        Ok(out)
    }

    /// Column vector with a single 1 at `index`.
    pub fn unit_column(field: PrimeField, m: usize, index: usize) -> Self {
        let mut out = Self::zeros(field, m, 1);
        out.data[index] = 1;
        out
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        debug_assert!(v < self.field.modulus());
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u32>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn check_field(&self, other: &FieldMatrix) -> Result<(), LinalgError> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch(
                self.field.modulus(),
                other.field.modulus(),
            ));
        }
        Ok(())
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        self.check_field(other)?;
        if self.rows != other.rows {
            return Err(LinalgError::ShapeMismatch(format!(
                "hstack of {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut out = Self::zeros(self.field, self.rows, cols);
        for r in 0..self.rows {
            out.data[r * cols..r * cols + self.cols].copy_from_slice(self.row(r));
            out.data[r * cols + self.cols..(r + 1) * cols].copy_from_slice(other.row(r));
        }
        Ok(out)
    }

    /// Horizontal concatenation of several matrices sharing a row count.
    pub fn hstack_all(
        field: PrimeField,
        rows: usize,
        parts: &[&FieldMatrix],
    ) -> Result<FieldMatrix, LinalgError> {
        parts
            .iter()
            .try_fold(Self::zeros(field, rows, 0), |acc, p| acc.hstack(p))
    }

    /// Vertical concatenation `[self ; other]`.
    pub fn vstack(&self, other: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        self.check_field(other)?;
        if self.cols != other.cols {
            return Err(LinalgError::ShapeMismatch(format!(
                "vstack of {} cols with {} cols",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FieldMatrix {
            field: self.field,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn select_columns(&self, idx: &[usize]) -> FieldMatrix {
        let mut out = Self::zeros(self.field, self.rows, idx.len());
        for r in 0..self.rows {
            for (k, &c) in idx.iter().enumerate() {
                out.data[r * idx.len() + k] = self.get(r, c);
            }
        }
        out
    }

    pub fn column_range(&self, start: usize, end: usize) -> FieldMatrix {
        let idx: Vec<usize> = (start..end).collect();
        self.select_columns(&idx)
    }

    pub fn row_range(&self, start: usize, end: usize) -> FieldMatrix {
        FieldMatrix {
            field: self.field,
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Append zero columns until the matrix has `cols` columns.
    pub fn pad_columns(&self, cols: usize) -> FieldMatrix {
        assert!(cols >= self.cols);
        let pad = Self::zeros(self.field, self.rows, cols - self.cols);
        self.hstack(&pad).expect("same field and rows")
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut out = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    pub fn mul(&self, other: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.field.modulus() as u64;
        let mut out = Self::zeros(self.field, self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc = (acc + self.get(r, k) as u64 * other.get(k, c) as u64) % p;
                }
                out.data[r * other.cols + c] = acc as u32;
            }
        }
        Ok(out)
    }

    fn zip_with(
        &self,
        other: &FieldMatrix,
        f: impl Fn(u32, u32) -> u32,
    ) -> Result<FieldMatrix, LinalgError> {
        self.check_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(FieldMatrix {
            data,
            ..self.clone()
        })
    }

    pub fn add(&self, other: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        let f = self.field;
        self.zip_with(other, |a, b| f.add(a, b))
    }

    pub fn sub(&self, other: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        let f = self.field;
        self.zip_with(other, |a, b| f.sub(a, b))
    }

    pub fn neg(&self) -> FieldMatrix {
        let f = self.field;
        FieldMatrix {
            data: self.data.iter().map(|&a| f.neg(a)).collect(),
            ..self.clone()
        }
    }

    /// Reduced row echelon form by Gauss-Jordan elimination.
    ///
    /// Columns are scanned left to right and the pivot row is the first row at
    /// or below the current one with a nonzero entry, so the result is fully
    /// deterministic.
    pub fn rref(&self) -> Rref {
        let f = self.field;
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            m.swap_rows(row, pr);
            let inv = f.inv(m.get(row, col)).expect("nonzero pivot");
            m.scale_row(row, inv);
            for r in 0..m.rows {
                if r != row {
                    let factor = m.get(r, col);
                    if factor != 0 {
                        m.add_row_multiple(r, row, f.neg(factor));
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
        }
        Rref {
            matrix: m,
            pivot_cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn scale_row(&mut self, r: usize, s: u32) {
        let f = self.field;
        for c in 0..self.cols {
            let v = self.get(r, c);
            self.data[r * self.cols + c] = f.mul(v, s);
        }
    }

    /// row[dst] += s * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, s: u32) {
        let f = self.field;
        for c in 0..self.cols {
            let v = f.add(self.get(dst, c), f.mul(s, self.get(src, c)));
            self.data[dst * self.cols + c] = v;
        }
    }

    /// Basis of the right nullspace `{x : self * x = 0}` as columns, one per free column.
    pub fn kernel(&self) -> FieldMatrix {
        let f = self.field;
        let rref = self.rref();
        let free: Vec<usize> = (0..self.cols)
            .filter(|c| !rref.pivot_cols.contains(c))
            .collect();
        let mut out = Self::zeros(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, 1);
            for (r, &pc) in rref.pivot_cols.iter().enumerate() {
                out.set(pc, k, f.neg(rref.matrix.get(r, fc)));
            }
        }
        out
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<FieldMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let aug = self.hstack(&Self::identity(self.field, self.rows)).ok()?;
        let rref = aug.rref();
        if rref
            .pivot_cols
            .iter()
            .take_while(|&&c| c < self.cols)
            .count()
            != self.rows
        {
            return None;
        }
        Some(rref.matrix.column_range(self.cols, 2 * self.cols))
    }
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(u32::to_string).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn rref_of_identity_is_identity() {
        let i3 = FieldMatrix::identity(gf(3), 3);
        let r = i3.rref();
        assert_eq!(r.matrix, i3);
        assert_eq!(r.pivot_cols, vec![0, 1, 2]);
        assert_eq!(r.rank(), 3);
    }

    #[test]
    fn rref_leftmost_pivots() {
        let m = FieldMatrix::from_rows(gf(5), &[vec![0, 2, 4, 1], vec![0, 1, 2, 4]]).unwrap();
        let r = m.rref();
        assert_eq!(r.pivot_cols, vec![1, 3]);
        assert_eq!(r.matrix.row(0), &[0, 1, 2, 0]);
        assert_eq!(r.matrix.row(1), &[0, 0, 0, 1]);
    }

    #[test]
    fn kernel_annihilates() {
        let m = FieldMatrix::from_rows(gf(3), &[vec![1, 2, 0, 1], vec![2, 1, 1, 0]]).unwrap();
        let k = m.kernel();
        assert_eq!(k.cols(), 4 - m.rank());
        assert!(m.mul(&k).unwrap().is_zero());
    }

    #[test]
    fn inverse_round_trip() {
        let m = FieldMatrix::from_rows(gf(7), &[vec![1, 2], vec![3, 4]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), FieldMatrix::identity(gf(7), 2));
        let singular = FieldMatrix::from_rows(gf(7), &[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn field_mismatch_is_reported() {
        let a = FieldMatrix::identity(gf(2), 2);
        let b = FieldMatrix::identity(gf(3), 2);
        assert_eq!(a.mul(&b), Err(LinalgError::FieldMismatch(2, 3)));
    }
}
