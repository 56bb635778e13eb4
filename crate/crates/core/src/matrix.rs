//! Dense real symmetric matrices.
//!
//! [`SymMatrix`] is the carrier for every matrix in the crate: the observed
//! matrix `W`, SDP iterates `X`, dual certificates `Y` and projectors `P`.
//! Symmetry is exact: every constructor either writes both triangles from a
//! single value or averages the two triangles.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Dense real symmetric `n x n` matrix with `n >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    inner: Mat<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { inner: Mat::zeros(n, n) })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { inner: Mat::identity(n, n) })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        check_dim(diag.len())?;
        let n = diag.len();
        Ok(Self {
            inner: Mat::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }),
        })
    }

    /// `x xᵀ`.
    pub fn outer(x: &[f64]) -> Result<Self> {
        check_dim(x.len())?;
        let n = x.len();
        Ok(Self {
            inner: Mat::from_fn(n, n, |i, j| x[i] * x[j]),
        })
    }

    /// Builds a matrix from its upper triangle: `f(i, j)` is called once for
    /// every `i <= j` in column-major order and mirrored.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dim(n)?;
        let mut inner = Mat::<f64>::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                inner[(i, j)] = v;
                inner[(j, i)] = v;
            }
        }
        Ok(Self { inner })
    }

    /// Row-major literal; the rows must form an exactly symmetric square matrix.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        check_dim(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for j in 0..i {
                if row[j] != rows[j][i] {
                    return Err(Error::ContractViolation(format!(
                        "entries ({i}, {j}) and ({j}, {i}) differ"
                    )));
                }
            }
        }
        Ok(Self {
            inner: Mat::from_fn(n, n, |i, j| rows[i][j]),
        })
    }

    /// Accepts a nearly symmetric square matrix (asymmetry at most `tol`
    /// relative to `max(1, max |m_ij|)`) and returns its symmetric part.
    pub fn from_mat_checked(m: MatRef<'_, f64>, tol: f64) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
        }
        check_dim(n)?;
        let mut scale = 1.0_f64;
        for j in 0..n {
            for i in 0..n {
                let v = m[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                scale = scale.max(v.abs());
            }
        }
        for j in 0..n {
            for i in 0..j {
                let gap = (m[(i, j)] - m[(j, i)]).abs();
                if gap > tol * scale {
                    return Err(Error::ContractViolation(format!(
                        "matrix is not symmetric: |m[{i},{j}] - m[{j},{i}]| = {gap:e}"
                    )));
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    /// `(m + mᵀ) / 2`, with both triangles written from the same value.
    pub fn symmetrize(m: MatRef<'_, f64>) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "symmetrize requires a square matrix");
        assert!(n >= 1, "symmetrize requires n >= 1");
        let mut inner = Mat::<f64>::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                inner[(i, j)] = v;
                inner[(j, i)] = v;
            }
        }
        Self { inner }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    /// Writes `v` at `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.inner[(i, j)] = v;
        self.inner[(j, i)] = v;
    }

    pub fn as_ref(&self) -> MatRef<'_, f64> {
        self.inner.as_ref()
    }

    pub fn into_inner(self) -> Mat<f64> {
        self.inner
    }

    /// Applies `f` to every entry. `f` must not depend on the position
    /// asymmetrically; it sees each entry exactly once.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        let n = self.n();
        let mut out = Mat::<f64>::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(self.inner[(i, j)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Self { inner: out }
    }

    /// Entrywise `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &SymMatrix, b: f64) -> Result<Self> {
        self.check_same(other)?;
        let n = self.n();
        Ok(Self {
            inner: Mat::from_fn(n, n, |i, j| a * self.inner[(i, j)] + b * other.inner[(i, j)]),
        })
    }

    pub fn add(&self, other: &SymMatrix) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self + c I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n() {
            out.inner[(i, i)] += c;
        }
        out
    }

    /// Frobenius inner product `<self, other> = Tr(self other)`.
    pub fn dot(&self, other: &SymMatrix) -> Result<f64> {
        self.check_same(other)?;
        let n = self.n();
        let mut acc = 0.0;
        for j in 0..n {
            let a = self.inner.col(j);
            let b = other.inner.col(j);
            for i in 0..n {
                acc += a[i] * b[i];
            }
        }
        Ok(acc)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm_l2()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.inner[(i, i)]).sum()
    }

    /// `m x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let mut out = vec![0.0; n];
        // column-major: accumulate x_j * column j
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let col = self.inner.col(j);
            for (i, o) in out.iter_mut().enumerate() {
                *o += col[i] * xj;
            }
        }
        Ok(out)
    }

    /// `1ᵀ m 1`.
    pub fn total_sum(&self) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for j in 0..n {
            let col = self.inner.col(j);
            for i in 0..n {
                acc += col[i];
            }
        }
        acc
    }

    pub fn min_entry(&self) -> f64 {
        self.fold_upper(f64::INFINITY, |acc, _, _, v| acc.min(v))
    }

    /// Smallest off-diagonal entry; `+inf` when `n = 1`.
    pub fn min_offdiag(&self) -> f64 {
        self.fold_upper(f64::INFINITY, |acc, i, j, v| if i != j { acc.min(v) } else { acc })
    }

    /// Largest off-diagonal magnitude; `0` when `n = 1`.
    pub fn max_abs_offdiag(&self) -> f64 {
        self.fold_upper(0.0, |acc, i, j, v| if i != j { acc.max(v.abs()) } else { acc })
    }

    pub fn max_abs(&self) -> f64 {
        self.fold_upper(0.0, |acc, _, _, v| acc.max(v.abs()))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.inner[(i, i)]).collect()
    }

    /// First non-finite entry, if any.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        let n = self.n();
        for j in 0..n {
            for i in 0..=j {
                if !self.inner[(i, j)].is_finite() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.find_non_finite() {
            Some((row, col)) => Err(Error::NonFinite { row, col }),
            None => Ok(()),
        }
    }

    fn fold_upper(&self, init: f64, mut f: impl FnMut(f64, usize, usize, f64) -> f64) -> f64 {
        let n = self.n();
        let mut acc = init;
        for j in 0..n {
            for i in 0..=j {
                acc = f(acc, i, j, self.inner[(i, j)]);
            }
        }
        acc
    }

    fn check_same(&self, other: &SymMatrix) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: other.n() });
        }
        Ok(())
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension("matrix dimension must be at least 1".into()));
    }
    Ok(())
}

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(matches!(SymMatrix::zeros(0), Err(Error::InvalidDimension(_))));
        assert!(matches!(SymMatrix::from_diagonal(&[]), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        let err = SymMatrix::from_rows(&[&[0.0, 1.0], &[2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)));
    }

    #[test]
    fn checked_constructor_symmetrizes_within_tolerance() {
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => 1.0,
            (1, 0) => 1.0 + 1e-12,
            _ => 0.0,
        });
        let s = SymMatrix::from_mat_checked(m.as_ref(), 1e-9).unwrap();
        assert_eq!(s.get(0, 1), s.get(1, 0));

        let bad = Mat::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { 1.0 } else { 0.0 });
        assert!(SymMatrix::from_mat_checked(bad.as_ref(), 1e-9).is_err());
    }

    #[test]
    fn basic_reductions() {
        let m = SymMatrix::from_rows(&[&[1.0, -2.0], &[-2.0, 3.0]]).unwrap();
        assert_eq!(m.trace(), 4.0);
        assert_eq!(m.total_sum(), 0.0);
        assert_eq!(m.min_offdiag(), -2.0);
        assert_eq!(m.max_abs_offdiag(), 2.0);
        assert_eq!(m.matvec(&[1.0, 1.0]).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(m.dot(&SymMatrix::identity(2).unwrap()).unwrap(), 4.0);
        assert!(matches!(m.matvec(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn non_finite_entries_are_found() {
        let mut m = SymMatrix::zeros(3).unwrap();
        m.set(2, 1, f64::NAN);
        assert_eq!(m.check_finite(), Err(Error::NonFinite { row: 1, col: 2 }));
    }
}
