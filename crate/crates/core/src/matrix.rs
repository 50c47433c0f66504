//! Dense matrices over a [`FieldSpec`] with exact Gauss-Jordan elimination.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::gf::{FieldElement, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("row index {index} out of range for {rows} rows")]
    BadIndex { index: usize, rows: usize },
    #[error("operands live in different fields")]
    FieldMismatch,
    #[error("entry ({a}, {b}) is not a field element")]
    BadEntry { a: u64, b: u64 },
}

/// Row-major dense matrix; every entry belongs to `spec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    spec: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl FieldMatrix {
    pub fn zeros(spec: FieldSpec, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            spec,
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn identity(spec: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(spec, n, n);
        for i in 0..n {
            m.set(i, i, spec.one());
        }
        m
    }

    /// Builds from row-major data, checking length and membership.
    pub fn new(
        spec: FieldSpec,
        rows: usize,
        cols: usize,
        data: Vec<FieldElement>,
    ) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::ShapeMismatch("data length != rows * cols"));
        }
        if let Some(bad) = data.iter().find(|&&x| !spec.contains(x)) {
            return Err(MatrixError::BadEntry { a: bad.a, b: bad.b });
        }
        Ok(FieldMatrix {
            spec,
            rows,
            cols,
            data,
        })
    }

    /// Builds from signed integer rows over the prime subfield.
    pub fn from_i64_rows(spec: FieldSpec, rows: &[&[i64]]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::ShapeMismatch("ragged rows"));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| spec.from_i64(v)))
            .collect();
        Self::new(spec, rows.len(), cols, data)
    }

    /// Stacks equal-length column vectors side by side.
    pub fn from_columns(
        spec: FieldSpec,
        rows: usize,
        columns: &[Vec<FieldElement>],
    ) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(spec, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(MatrixError::ShapeMismatch("column length != rows"));
            }
            for (i, &x) in col.iter().enumerate() {
                if !spec.contains(x) {
                    return Err(MatrixError::BadEntry { a: x.a, b: x.b });
                }
                m.set(i, j, x);
            }
        }
        Ok(m)
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: FieldElement) {
        debug_assert!(self.spec.contains(x));
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.spec, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Rows at `indices`, taken in increasing index order.
    pub fn submatrix_rows(&self, indices: &[usize]) -> Result<Self, MatrixError> {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in &idx {
            if i >= self.rows {
                return Err(MatrixError::BadIndex {
                    index: i,
                    rows: self.rows,
                });
            }
            data.extend_from_slice(self.row(i));
        }
        Ok(FieldMatrix {
            spec: self.spec,
            rows: idx.len(),
            cols: self.cols,
            data,
        })
    }

    pub fn mat_vec(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>, MatrixError> {
        if x.len() != self.cols {
            return Err(MatrixError::ShapeMismatch("vector length != cols"));
        }
        let f = self.spec;
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(f.zero(), |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    pub fn mat_mat(&self, other: &FieldMatrix) -> Result<FieldMatrix, MatrixError> {
        if self.spec != other.spec {
            return Err(MatrixError::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(MatrixError::ShapeMismatch("lhs cols != rhs rows"));
        }
        let f = self.spec;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let v = (0..self.cols).fold(f.zero(), |acc, t| {
                    f.add(acc, f.mul(self.get(i, t), other.get(t, j)))
                });
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form and its pivot columns.
    ///
    /// Columns are scanned left to right; the pivot row is the first row at
    /// or below the current one with a nonzero entry in that column.
    pub fn rref(&self) -> (FieldMatrix, Vec<usize>) {
        let f = self.spec;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in c..m.cols {
                let v = f.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space, one vector per free column in
    /// increasing column order: the free variable is 1, the other free
    /// variables are 0 and the pivot variables are solved from the rref.
    pub fn kernel_basis(&self) -> Vec<Vec<FieldElement>> {
        let f = self.spec;
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![f.zero(); self.cols];
                v[free] = f.one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(r.get(row, free));
                }
                v
            })
            .collect()
    }

    pub fn kernel_dim(&self) -> usize {
        self.cols - self.rank()
    }
}
