//! Dense exact linear algebra: matrices, reduced row echelon form, kernels,
//! span arithmetic, characteristic polynomials, and cochain complexes.
//!
//! Everything here is generic over [`Scalar`] but written for the exact
//! instantiation at [`Rational`](crate::Rational): rank, kernel and span
//! computations are Gaussian elimination with exact division, so over the
//! rationals the answers are proofs, not estimates. The numeric scalar types
//! only reuse the arithmetic (never the rank routines).
//!
//! Spans are represented as matrices whose columns generate the subspace;
//! the free functions [`span_sum`], [`span_intersect`], [`preimage_span`]
//! and friends implement the subspace lattice used by the spectral-sequence
//! and symmetry-breaking modules.

use crate::scalar::Scalar;
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors from shape validation and complex construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    /// Two matrices (or a matrix and a vector) had incompatible shapes.
    #[error("shape mismatch in {context}: expected {expected_rows}x{expected_cols}, found {found_rows}x{found_cols}")]
    ShapeMismatch {
        context: String,
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },
    /// A square matrix was required.
    #[error("{context}: matrix is {rows}x{cols}, expected square")]
    NotSquare {
        context: String,
        rows: usize,
        cols: usize,
    },
    /// Two consecutive differentials of a complex do not compose to zero.
    #[error("differential does not square to zero: the composite out of degree {degree} has a nonzero entry at row {row}, column {col}")]
    CompositionNonzero { degree: i64, row: usize, col: usize },
}

/// Dense row-major matrix over a scalar field.
///
/// Matrices are value types: the public API builds them whole and never
/// mutates them afterwards. All accessors are bounds-checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<S: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    /// The zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    /// The identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    /// Build from a closure giving the entry at `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Build from row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(LinalgError::ShapeMismatch {
                    context: format!("from_rows, row {i}"),
                    expected_rows: 1,
                    expected_cols: ncols,
                    found_rows: 1,
                    found_cols: r.len(),
                });
            }
        }
        Ok(Matrix {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Build from column vectors; all columns must have equal length.
    pub fn from_cols(cols: Vec<Vec<S>>) -> Result<Self, LinalgError> {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, Vec::len);
        for (j, c) in cols.iter().enumerate() {
            if c.len() != nrows {
                return Err(LinalgError::ShapeMismatch {
                    context: format!("from_cols, column {j}"),
                    expected_rows: nrows,
                    expected_cols: 1,
                    found_rows: c.len(),
                    found_cols: 1,
                });
            }
        }
        Ok(Matrix::from_fn(nrows, ncols, |i, j| cols[j][i].clone()))
    }

    /// A single-column matrix holding `v`.
    pub fn column(v: &[S]) -> Self {
        Matrix::from_fn(v.len(), 1, |i, _| v[i].clone())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    /// Entry at `(i, j)`. Panics on out-of-range indices.
    pub fn at(&self, i: usize, j: usize) -> &S {
        assert!(
            i < self.rows && j < self.cols,
            "matrix index ({i}, {j}) out of bounds for {}x{}",
            self.rows,
            self.cols
        );
        &self.data[i * self.cols + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, value: S) {
        assert!(
            i < self.rows && j < self.cols,
            "matrix index ({i}, {j}) out of bounds for {}x{}",
            self.rows,
            self.cols
        );
        self.data[i * self.cols + j] = value;
    }

    /// Row `i` as a vector.
    pub fn row(&self, i: usize) -> Vec<S> {
        assert!(i < self.rows, "row {i} out of bounds for {} rows", self.rows);
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    /// Column `j` as a vector.
    pub fn col(&self, j: usize) -> Vec<S> {
        assert!(j < self.cols, "column {j} out of bounds for {} columns", self.cols);
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// First nonzero entry in row-major order, if any.
    pub fn first_nonzero(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|x| !x.is_zero())
            .map(|k| (k / self.cols.max(1), k % self.cols.max(1)))
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.require_shape(other, "matrix addition")?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.require_shape(other, "matrix subtraction")?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch {
                context: "matrix product".to_string(),
                expected_rows: self.cols,
                expected_cols: other.cols,
                found_rows: other.rows,
                found_cols: other.cols,
            });
        }
        let mut out: Matrix<S> = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.at(i, j).clone();
                    out.set(i, j, cur + a.clone() * b.clone());
                }
            }
        }
        Ok(out)
    }

    /// Apply to a vector: `self * v`.
    pub fn apply(&self, v: &[S]) -> Result<Vec<S>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::ShapeMismatch {
                context: "matrix-vector product".to_string(),
                expected_rows: self.cols,
                expected_cols: 1,
                found_rows: v.len(),
                found_cols: 1,
            });
        }
        let mut out = vec![S::zero(); self.rows];
        for i in 0..self.rows {
            for (j, x) in v.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                out[i] = out[i].clone() + self.at(i, j).clone() * x.clone();
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.rows != other.rows {
            return Err(LinalgError::ShapeMismatch {
                context: "horizontal stack".to_string(),
                expected_rows: self.rows,
                expected_cols: other.cols,
                found_rows: other.rows,
                found_cols: other.cols,
            });
        }
        Ok(Matrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.at(i, j).clone()
            } else {
                other.at(i, j - self.cols).clone()
            }
        }))
    }

    /// Vertical concatenation, `self` on top.
    pub fn vstack(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.cols {
            return Err(LinalgError::ShapeMismatch {
                context: "vertical stack".to_string(),
                expected_rows: other.rows,
                expected_cols: self.cols,
                found_rows: other.rows,
                found_cols: other.cols,
            });
        }
        Ok(Matrix::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.at(i, j).clone()
            } else {
                other.at(i - self.rows, j).clone()
            }
        }))
    }

    /// Submatrix of the listed columns, in order.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        Matrix::from_fn(self.rows, cols.len(), |i, j| self.at(i, cols[j]).clone())
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> Result<S, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                context: "trace".to_string(),
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut t = S::zero();
        for i in 0..self.rows {
            t = t + self.at(i, i).clone();
        }
        Ok(t)
    }

    /// `self` raised to a nonnegative power (square matrices only).
    pub fn pow(&self, k: usize) -> Result<Self, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                context: "matrix power".to_string(),
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut out = Matrix::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    fn require_shape(&self, other: &Self, context: &str) -> Result<(), LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::ShapeMismatch {
                context: context.to_string(),
                expected_rows: self.rows,
                expected_cols: self.cols,
                found_rows: other.rows,
                found_cols: other.cols,
            });
        }
        Ok(())
    }

    /// Reduced row echelon form, with pivot column indices.
    pub fn rref(&self) -> Rref<S> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // Find a pivot row at or below r.
            let Some(p) = (r..m.rows).find(|&i| !m.at(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = S::one() / m.at(r, c).clone();
            for j in c..m.cols {
                let v = m.at(r, j).clone() * inv.clone();
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.at(i, c).is_zero() {
                    continue;
                }
                let factor = m.at(i, c).clone();
                for j in c..m.cols {
                    let v = m.at(i, j).clone() - factor.clone() * m.at(r, j).clone();
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { reduced: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data
                .swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Rank over the scalar field.
    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of the kernel, one basis vector per column of the result.
    /// The result has shape `ncols x nullity`.
    pub fn kernel_basis(&self) -> Matrix<S> {
        let Rref { reduced, pivots } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            out.set(f, k, S::one());
            for (r, &p) in pivots.iter().enumerate() {
                out.set(p, k, -reduced.at(r, f).clone());
            }
        }
        out
    }

    /// Basis of the column space: the pivot columns of `self`.
    pub fn image_basis(&self) -> Matrix<S> {
        let pivots = self.rref().pivots;
        self.select_cols(&pivots)
    }

    /// Solve `self * x = rhs` for one right-hand side; `None` if inconsistent.
    pub fn solve(&self, rhs: &[S]) -> Result<Option<Vec<S>>, LinalgError> {
        if rhs.len() != self.rows {
            return Err(LinalgError::ShapeMismatch {
                context: "solve right-hand side".to_string(),
                expected_rows: self.rows,
                expected_cols: 1,
                found_rows: rhs.len(),
                found_cols: 1,
            });
        }
        let aug = self.hstack(&Matrix::column(rhs))?;
        let Rref { reduced, pivots } = aug.rref();
        if pivots.contains(&self.cols) {
            return Ok(None); // A pivot in the augmented column: inconsistent.
        }
        let mut x = vec![S::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = reduced.at(r, self.cols).clone();
        }
        Ok(Some(x))
    }

    /// Coefficients of the characteristic polynomial
    /// `lambda^n + c[1] lambda^(n-1) + ... + c[n]`, returned as
    /// `[1, c1, ..., cn]`, by the Faddeev-LeVerrier recursion.
    pub fn charpoly(&self) -> Result<Vec<S>, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                context: "characteristic polynomial".to_string(),
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut coeffs = vec![S::one()];
        let mut m = Matrix::identity(n);
        for k in 1..=n {
            m = self.mul(&m)?;
            let c = -(S::one() / S::from_integer(k as i64)) * m.trace()?;
            for i in 0..n {
                let v = m.at(i, i).clone() + c.clone();
                m.set(i, i, v);
            }
            coeffs.push(c);
        }
        Ok(coeffs)
    }
}

/// Result of reduced row echelon elimination.
#[derive(Debug, Clone)]
pub struct Rref<S: Scalar> {
    pub reduced: Matrix<S>,
    pub pivots: Vec<usize>,
}

/// Dimension of the span (columns of `m`).
pub fn span_dim<S: Scalar>(m: &Matrix<S>) -> usize {
    m.rank()
}

/// Span of the union of two column spans (same ambient dimension).
pub fn span_sum<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>, LinalgError> {
    a.hstack(b)
}

/// Basis of the intersection of two column spans.
///
/// A kernel vector `(u, w)` of `[A | -B]` satisfies `A u = B w`; the
/// intersection is the image of the `u`-parts under `A`.
pub fn span_intersect<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>, LinalgError> {
    let stacked = a.hstack(&b.neg())?;
    let ker = stacked.kernel_basis();
    let u_part = Matrix::from_fn(a.ncols(), ker.ncols(), |i, j| ker.at(i, j).clone());
    a.mul(&u_part).map(|m| m.image_basis())
}

/// Basis of `{ v : f(v) in span(s) }` for a linear map `f`.
pub fn preimage_span<S: Scalar>(f: &Matrix<S>, s: &Matrix<S>) -> Result<Matrix<S>, LinalgError> {
    if f.nrows() != s.nrows() {
        return Err(LinalgError::ShapeMismatch {
            context: "preimage of span".to_string(),
            expected_rows: f.nrows(),
            expected_cols: s.ncols(),
            found_rows: s.nrows(),
            found_cols: s.ncols(),
        });
    }
    let stacked = f.hstack(&s.neg())?;
    let ker = stacked.kernel_basis();
    let v_part = Matrix::from_fn(f.ncols(), ker.ncols(), |i, j| ker.at(i, j).clone());
    Ok(v_part.image_basis())
}

/// Whether `v` lies in the column span of `s`.
pub fn span_contains<S: Scalar>(s: &Matrix<S>, v: &[S]) -> Result<bool, LinalgError> {
    let aug = s.hstack(&Matrix::column(v))?;
    Ok(aug.rank() == s.rank())
}

/// Whether two column spans are equal as subspaces.
pub fn spans_equal<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<bool, LinalgError> {
    let ra = a.rank();
    let rb = b.rank();
    if ra != rb {
        return Ok(false);
    }
    Ok(a.hstack(b)?.rank() == ra)
}

/// `dim((A + B) / B)`: how much `A` adds on top of `B`.
pub fn dim_added<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<usize, LinalgError> {
    Ok(a.hstack(b)?.rank() - b.rank())
}

/// A cochain complex of finite-dimensional spaces in consecutive degrees.
///
/// `dims[k]` is the dimension in degree `offset + k`; `maps[k]` is the
/// differential out of that degree (shape `dims[k+1] x dims[k]`).
/// Construction verifies shapes and that consecutive differentials compose
/// to zero, reporting the first offending entry otherwise.
#[derive(Debug, Clone)]
pub struct MatrixComplex<S: Scalar> {
    offset: i64,
    dims: Vec<usize>,
    maps: Vec<Matrix<S>>,
}

impl<S: Scalar> MatrixComplex<S> {
    pub fn new(offset: i64, dims: Vec<usize>, maps: Vec<Matrix<S>>) -> Result<Self, LinalgError> {
        let expected_maps = dims.len().saturating_sub(1);
        if maps.len() != expected_maps {
            return Err(LinalgError::ShapeMismatch {
                context: "complex: number of differentials".to_string(),
                expected_rows: expected_maps,
                expected_cols: 0,
                found_rows: maps.len(),
                found_cols: 0,
            });
        }
        for (k, m) in maps.iter().enumerate() {
            if m.nrows() != dims[k + 1] || m.ncols() != dims[k] {
                return Err(LinalgError::ShapeMismatch {
                    context: format!("complex: differential out of degree {}", offset + k as i64),
                    expected_rows: dims[k + 1],
                    expected_cols: dims[k],
                    found_rows: m.nrows(),
                    found_cols: m.ncols(),
                });
            }
        }
        for k in 0..maps.len().saturating_sub(1) {
            let comp = maps[k + 1].mul(&maps[k])?;
            if let Some((row, col)) = comp.first_nonzero() {
                return Err(LinalgError::CompositionNonzero {
                    degree: offset + k as i64,
                    row,
                    col,
                });
            }
        }
        Ok(MatrixComplex { offset, dims, maps })
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimension in a given degree (zero outside the stored range).
    pub fn dim_in_degree(&self, degree: i64) -> usize {
        let idx = degree - self.offset;
        if idx < 0 || idx as usize >= self.dims.len() {
            0
        } else {
            self.dims[idx as usize]
        }
    }

    /// The differential out of `degree`, if stored.
    pub fn map_out_of(&self, degree: i64) -> Option<&Matrix<S>> {
        let idx = degree - self.offset;
        if idx < 0 {
            return None;
        }
        self.maps.get(idx as usize)
    }

    /// Cohomology dimensions per degree:
    /// `dim H^k = dim C^k - rank d_k - rank d_(k-1)`.
    pub fn cohomology_dims(&self) -> BTreeMap<i64, usize> {
        let ranks: Vec<usize> = self.maps.iter().map(Matrix::rank).collect();
        let mut out = BTreeMap::new();
        for (k, &dim) in self.dims.iter().enumerate() {
            let rank_out = ranks.get(k).copied().unwrap_or(0);
            let rank_in = if k == 0 { 0 } else { ranks[k - 1] };
            out.insert(self.offset + k as i64, dim - rank_out - rank_in);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rint, Rational};

    fn m(rows: Vec<Vec<i64>>) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(rint).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rref_rank_and_kernel() {
        let a = m(vec![vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let k = a.kernel_basis();
        assert_eq!(k.ncols(), 1);
        // Every kernel column maps to zero.
        let img = a.mul(&k).unwrap();
        assert!(img.is_zero());
    }

    #[test]
    fn rank_nullity_holds() {
        let a = m(vec![vec![1, 2, 3, 4], vec![0, 1, 1, 0]]);
        assert_eq!(a.rank() + a.kernel_basis().ncols(), a.ncols());
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = m(vec![vec![1, 1], vec![0, 1]]);
        let x = a.solve(&[rint(3), rint(1)]).unwrap().unwrap();
        assert_eq!(x, vec![rint(2), rint(1)]);

        let b = m(vec![vec![1, 1], vec![2, 2]]);
        assert!(b.solve(&[rint(1), rint(3)]).unwrap().is_none());
    }

    #[test]
    fn span_operations() {
        // span{e1, e2} intersect span{e2, e3} = span{e2} in Q^3.
        let a = m(vec![vec![1, 0], vec![0, 1], vec![0, 0]]);
        let b = m(vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        let i = span_intersect(&a, &b).unwrap();
        assert_eq!(span_dim(&i), 1);
        assert!(span_contains(&i, &[rint(0), rint(5), rint(0)]).unwrap());
        assert_eq!(span_sum(&a, &b).unwrap().rank(), 3);
    }

    #[test]
    fn preimage_includes_kernel() {
        // f: Q^3 -> Q^2 projecting away last coordinate; preimage of span{e1}
        // is span{e1, e3}.
        let f = m(vec![vec![1, 0, 0], vec![0, 1, 0]]);
        let s = m(vec![vec![1], vec![0]]);
        let p = preimage_span(&f, &s).unwrap();
        assert_eq!(span_dim(&p), 2);
        assert!(span_contains(&p, &[rint(0), rint(0), rint(1)]).unwrap());
        assert!(!span_contains(&p, &[rint(0), rint(1), rint(0)]).unwrap());
    }

    #[test]
    fn charpoly_of_diagonal() {
        // diag(1, 2): lambda^2 - 3 lambda + 2.
        let a = m(vec![vec![1, 0], vec![0, 2]]);
        let c = a.charpoly().unwrap();
        assert_eq!(c, vec![rint(1), rint(-3), rint(2)]);
    }

    #[test]
    fn charpoly_of_nilpotent_vanishes() {
        let a = m(vec![vec![0, 1], vec![0, 0]]);
        assert_eq!(a.charpoly().unwrap(), vec![rint(1), rint(0), rint(0)]);
    }

    #[test]
    fn exact_arithmetic_survives_dense_elimination() {
        // Hilbert-like matrix: floating point would lose the exact rank story.
        let h = Matrix::from_fn(5, 5, |i, j| rat(1, (i + j + 1) as i64));
        assert_eq!(h.rank(), 5);
    }

    #[test]
    fn complex_rejects_nonzero_composition() {
        let d0 = m(vec![vec![1], vec![0]]);
        let d1 = m(vec![vec![1, 0]]);
        let err = MatrixComplex::new(0, vec![1, 2, 1], vec![d0, d1]).unwrap_err();
        assert!(matches!(err, LinalgError::CompositionNonzero { degree: 0, .. }));
    }

    #[test]
    fn complex_cohomology_of_exact_sequence() {
        // 0 -> Q -> Q^2 -> Q -> 0 with d0 = (1,0)^T, d1 = (0,1): exact in the
        // middle, H^0 = 0, H^2 = 0.
        let d0 = m(vec![vec![1], vec![0]]);
        let d1 = m(vec![vec![0, 1]]);
        let cx = MatrixComplex::new(0, vec![1, 2, 1], vec![d0, d1]).unwrap();
        let h = cx.cohomology_dims();
        assert_eq!(h[&0], 0);
        assert_eq!(h[&1], 0);
        assert_eq!(h[&2], 0);
    }
}
