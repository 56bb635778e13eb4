//! Dense symmetric eigendecomposition and the spectral utilities built on it:
//! top-eigenspace projectors, projector entry statistics, the semicircle law,
//! numerical rank and Haar-random orthonormal frames.

use faer::{Mat, MatRef, Side};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::gaussian;
use crate::error::{Error, Result};
use crate::matrix::{norm, SymMatrix};
use crate::seed::{SeedSpec, Stream};

/// Default absolute threshold for [`numerical_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-4;

/// Tolerance used when checking that an input is an orthogonal projector.
pub const PROJECTOR_TOL: f64 = 1e-6;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
///
/// Each eigenvector is signed so that its largest-magnitude coordinate
/// (first one on ties, up to a relative 1e-10) is positive.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl EigenPair {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.col(k).iter().copied().collect()
    }

    pub fn top_vector(&self) -> Vec<f64> {
        self.vector(self.n() - 1)
    }

    /// `Σ λ_i v_i v_iᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n();
        let mut scaled = self.vectors.clone();
        for (k, &l) in self.values.iter().enumerate() {
            scaled.col_mut(k).iter_mut().for_each(|x| *x *= l);
        }
        let m = &scaled * self.vectors.transpose();
        debug_assert_eq!(m.nrows(), n);
        SymMatrix::symmetrize(m.as_ref())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorStats {
    /// `max_i |P_ii - delta|`
    pub max_diag_dev: f64,
    /// `max_{i != j} |P_ij|`
    pub max_offdiag: f64,
    /// `min_{i != j} P_ij`
    pub min_offdiag_signed: f64,
}

/// Full eigendecomposition of a symmetric matrix.
pub fn eigh(m: &SymMatrix) -> Result<EigenPair> {
    m.check_finite()?;
    let evd = m
        .as_ref()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericFailure(format!("eigendecomposition did not converge: {e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
    let mut vectors = evd.U().to_owned();
    for k in 0..vectors.ncols() {
        fix_sign(vectors.col_mut(k));
    }
    Ok(EigenPair { values, vectors })
}

/// Ascending eigenvalues only.
pub fn eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    m.check_finite()?;
    m.as_ref()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NumericFailure(format!("eigenvalue iteration did not converge: {e:?}")))
}

pub fn lambda_max(m: &SymMatrix) -> Result<f64> {
    let v = eigenvalues(m)?;
    Ok(v[v.len() - 1])
}

fn fix_sign(col: faer::ColMut<'_, f64>) {
    let max_abs = col.as_ref().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    // coordinates equal in magnitude up to rounding count as ties
    let lead = col.as_ref().iter().position(|x| x.abs() >= max_abs * (1.0 - 1e-10)).unwrap_or(0);
    if col[lead] < 0.0 {
        col.iter_mut().for_each(|x| *x = -*x);
    }
}

/// `V Vᵀ` for a matrix `V` with orthonormal columns.
pub fn projector_onto_columns(v: MatRef<'_, f64>) -> SymMatrix {
    let p = v * v.transpose();
    SymMatrix::symmetrize(p.as_ref())
}

/// Orthogonal projector onto the span of the `r` eigenvectors with the
/// largest eigenvalues.
pub fn top_projector(m: &SymMatrix, r: usize) -> Result<SymMatrix> {
    let n = m.n();
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("projector rank must lie in 1..={n}, got {r}")));
    }
    let eig = eigh(m)?;
    Ok(projector_onto_columns(eig.vectors.as_ref().subcols(n - r, r)))
}

/// Checks `P² = P` on a fixed set of random probes: `‖P(Px) - Px‖ <= tol ‖x‖`.
///
/// Costs `O(n²)` per probe rather than the `O(n³)` of forming `P²`.
pub fn is_projector(p: &SymMatrix, tol: f64) -> bool {
    const PROBES: u64 = 3;
    if p.find_non_finite().is_some() {
        return false;
    }
    let n = p.n();
    let mut rng = SeedSpec::new(0x5eed, n as u64).rng(Stream::Probe);
    (0..PROBES).all(|_| {
        let x: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let px = p.matvec(&x).expect("probe has matching dimension");
        let ppx = p.matvec(&px).expect("probe has matching dimension");
        let err = norm(&ppx.iter().zip(&px).map(|(a, b)| a - b).collect::<Vec<_>>());
        err <= tol * norm(&x)
    })
}

pub(crate) fn require_projector(p: &SymMatrix) -> Result<()> {
    if !is_projector(p, PROJECTOR_TOL) {
        return Err(Error::ContractViolation("input is not an orthogonal projector".into()));
    }
    Ok(())
}

/// Entry concentration statistics of a projector against the reference
/// diagonal value `delta`.
pub fn projector_entry_stats(p: &SymMatrix, delta: f64) -> Result<ProjectorStats> {
    require_projector(p)?;
    let n = p.n();
    let mut max_diag_dev: f64 = 0.0;
    let mut max_offdiag: f64 = 0.0;
    let mut min_offdiag_signed = f64::INFINITY;
    for j in 0..n {
        for i in 0..=j {
            let v = p.get(i, j);
            if i == j {
                max_diag_dev = max_diag_dev.max((v - delta).abs());
            } else {
                max_offdiag = max_offdiag.max(v.abs());
                min_offdiag_signed = min_offdiag_signed.min(v);
            }
        }
    }
    if n == 1 {
        min_offdiag_signed = 0.0;
    }
    Ok(ProjectorStats { max_diag_dev, max_offdiag, min_offdiag_signed })
}

/// Semicircle density `sqrt(4 - x²) / (2π)` on `[-2, 2]`.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * std::f64::consts::PI)
    }
}

/// Semicircle distribution function.
pub fn semicircle_cdf(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// Inverse of [`semicircle_cdf`] on `[0, 1]`, by bisection to machine precision.
pub fn semicircle_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return -2.0;
    }
    if p >= 1.0 {
        return 2.0;
    }
    let (mut lo, mut hi) = (-2.0_f64, 2.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if semicircle_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mean of the semicircle law restricted to its top `delta` mass:
/// `(1/delta) ∫_q^2 x ρ(x) dx = (4 - q²)^{3/2} / (6π delta)` with `q` the
/// `1 - delta` quantile. This is the `alpha = 0` limit of the witness value.
pub fn semicircle_top_mean(delta: f64) -> f64 {
    assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    let q = semicircle_quantile(1.0 - delta);
    (4.0 - q * q).max(0.0).powf(1.5) / (6.0 * std::f64::consts::PI * delta)
}

/// Kolmogorov–Smirnov distance between the empirical law of `values` and
/// the semicircle law.
pub fn semicircle_ks(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("KS distance of an empty sample".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("KS distance of a sample containing NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = semicircle_cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Number of eigenvalues strictly above `abs_tol`.
pub fn numerical_rank(m: &SymMatrix, abs_tol: f64) -> Result<usize> {
    if !(abs_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("abs_tol must be positive, got {abs_tol}")));
    }
    Ok(eigenvalues(m)?.into_iter().filter(|&l| l > abs_tol).count())
}

/// `xᵀ m x`, computed as `<x, m x>`.
pub fn quadratic_form(m: &SymMatrix, x: &[f64]) -> Result<f64> {
    let mx = m.matvec(x)?;
    Ok(crate::matrix::dot(x, &mx))
}

/// Orthonormalizes the columns of `a` (full column rank assumed) by a thin
/// Householder QR with `R_ii >= 0`. Applied to a Gaussian matrix this yields
/// a Haar-distributed frame.
pub fn orthonormalize_columns(a: MatRef<'_, f64>) -> Mat<f64> {
    let k = a.ncols();
    if k == 0 {
        return Mat::zeros(a.nrows(), 0);
    }
    let qr = a.qr();
    let mut q = qr.compute_thin_Q();
    let r = qr.thin_R();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
    q
}

/// Haar-distributed `k x k` orthogonal matrix.
pub fn haar_orthogonal<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Mat<f64> {
    let g = gaussian_matrix(rng, k, k);
    orthonormalize_columns(g.as_ref())
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat<f64> {
    let mut g = Mat::<f64>::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            g[(i, j)] = gaussian(rng);
        }
    }
    g
}

/// Projector onto a Haar-random `r`-dimensional subspace of `R^n`.
pub fn haar_projector(n: usize, r: usize, seed: SeedSpec) -> Result<SymMatrix> {
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("subspace dimension must lie in 1..={n}, got {r}")));
    }
    let mut rng = seed.rng(Stream::HaarSpan);
    let g = gaussian_matrix(&mut rng, n, r);
    let q = orthonormalize_columns(g.as_ref());
    Ok(projector_onto_columns(q.as_ref()))
}
