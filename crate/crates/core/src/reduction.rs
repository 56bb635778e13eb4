//! Turning a certifier for `λ⁺` into a spiked Wishart detector.
//!
//! Given samples `y_1..y_N` in `R^n`, draw a fresh GOE spectrum
//! `λ_1 <= ... <= λ_n` and an orthonormal basis `v_1..v_n` whose first `N`
//! vectors span `V = span{y_i}` (Haar within `V`) and whose remaining
//! vectors are Haar in `V⊥`. Then
//!
//! ```text
//! W = Σ λ_i v_i v_iᵀ
//! ```
//!
//! is exactly GOE under the null, while under a planted negative spike the
//! sample span nearly misses the nonnegative direction `ẑ`, so `ẑᵀWẑ` is
//! pushed toward the top of the spectrum.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_goe, WishartSample};
use crate::error::{Error, Result};
use crate::matrix::{dot, norm, SymMatrix};
use crate::seed::{SeedSpec, Stream};
use crate::spectral::{self, gaussian_matrix, haar_orthogonal, orthonormalize_columns};

/// Relative threshold on Gram eigenvalues below which a direction is
/// treated as outside the sample span.
pub const SPAN_REL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EmbeddedInstance {
    pub w: SymMatrix,
    /// `n x n` orthonormal; column `i` carries `goe_eigs[i]`. The first
    /// `big_n` columns lie in (or pad) the sample span.
    pub v_basis: Mat<f64>,
    /// Ascending spectrum of the fresh GOE draw.
    pub goe_eigs: Vec<f64>,
    /// Numerical dimension of the sample span.
    pub span_dim: usize,
    pub big_n: usize,
    /// Ascending eigenvalues of the `N x N` Gram matrix `(1/N) SᵀS`, which
    /// are the nonzero eigenvalues of `Y = (1/N) Σ y_i y_iᵀ` plus zeros.
    pub sample_spectrum: Vec<f64>,
}

impl EmbeddedInstance {
    pub fn n(&self) -> usize {
        self.w.n()
    }

    pub fn basis_vector(&self, i: usize) -> Vec<f64> {
        self.v_basis.col(i).iter().copied().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionDiagnostics {
    /// `<ẑ, u>`
    pub zu_overlap: f64,
    /// `(1/N) Σ <ẑ, y_i>²`
    pub zhat_sample_energy: f64,
    /// Smallest nonzero eigenvalue of `Y`.
    pub mu: f64,
    /// `Σ_{i <= N} <ẑ, v_i>²`
    pub s: f64,
    #[serde(rename = "zWz")]
    pub z_w_z: f64,
    pub lambda_1: f64,
    /// `λ_{N+1}`
    pub lambda_n1: f64,
    /// `λ_{N+1} - (λ_{N+1} - λ_1) s`
    pub bound_rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    P,
    Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: Label,
    /// `c(W)`; NaN when the certifier was not run.
    pub certificate_value: f64,
    /// `2 - eps`
    pub threshold: f64,
}

/// `z_i = 1/sqrt(rho n)` where `u_i > 0`, else `0`.
pub fn make_z(u: &[f64], rho: f64) -> Result<Vec<f64>> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rho must lie in (0, 1), got {rho}")));
    }
    let c = 1.0 / (rho * u.len() as f64).sqrt();
    Ok(u.iter().map(|&x| if x > 0.0 { c } else { 0.0 }).collect())
}

/// `z / ‖z‖`: the normalized indicator of the positive coordinates of `u`.
pub fn make_zhat(u: &[f64], rho: f64) -> Result<Vec<f64>> {
    let z = make_z(u, rho)?;
    let s = norm(&z);
    if s == 0.0 {
        return Err(Error::Degenerate("spike has no positive coordinates".into()));
    }
    Ok(z.into_iter().map(|x| x / s).collect())
}

/// Columns of a Haar-random orthonormal frame of size `extra` in the
/// orthogonal complement of the orthonormal columns of `q`.
fn complement_frame(q: MatRef<'_, f64>, extra: usize, rng: &mut impl rand::Rng) -> Mat<f64> {
    let n = q.nrows();
    let mut g = gaussian_matrix(rng, n, extra);
    if q.ncols() > 0 {
        // two passes of classical Gram-Schmidt against q
        for _ in 0..2 {
            let c = q.transpose() * &g;
            g -= q * &c;
        }
    }
    orthonormalize_columns(g.as_ref())
}

fn hcat(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    let n = a.nrows();
    let k = a.ncols();
    Mat::from_fn(n, k + b.ncols(), |i, j| if j < k { a[(i, j)] } else { b[(i, j - k)] })
}

/// Orthonormal frame of the sample span (exactly `big_n` columns, padded
/// when the span is deficient), its dimension and the Gram spectrum.
fn sample_frame(sample: &WishartSample, rng: &mut impl rand::Rng) -> Result<(Mat<f64>, usize, Vec<f64>)> {
    let s = sample.samples.as_ref();
    let big_n = sample.big_n;
    let gram = SymMatrix::symmetrize((s.transpose() * s).as_ref()).scaled(1.0 / big_n as f64);
    let spectrum = spectral::eigenvalues(&gram)?;
    let top = spectrum[big_n - 1];
    let thr = SPAN_REL_TOL * top;
    let span_dim = if top > 0.0 { spectrum.iter().filter(|&&l| l > thr).count() } else { 0 };

    if span_dim == big_n {
        return Ok((orthonormalize_columns(s), span_dim, spectrum));
    }
    let span = if span_dim > 0 {
        let eig = spectral::eigh(&gram)?;
        let mut b = Mat::<f64>::zeros(sample.n, span_dim);
        for (c, k) in (big_n - span_dim..big_n).enumerate() {
            let scale = 1.0 / (big_n as f64 * eig.values[k]).sqrt();
            let col = s * eig.vectors.col(k);
            for i in 0..sample.n {
                b[(i, c)] = col[i] * scale;
            }
        }
        orthonormalize_columns(b.as_ref())
    } else {
        Mat::zeros(sample.n, 0)
    };
    let pad = complement_frame(span.as_ref(), big_n - span_dim, rng);
    Ok((hcat(span.as_ref(), pad.as_ref()), span_dim, spectrum))
}

/// Embeds the sample span into a fresh GOE spectrum, smallest `N`
/// eigenvalues on the span.
pub fn embed_wishart(sample: &WishartSample, seed: SeedSpec) -> Result<EmbeddedInstance> {
    let n = sample.n;
    let big_n = sample.big_n;
    if big_n >= n {
        return Err(Error::InvalidParameter(format!("need N < n, got N = {big_n}, n = {n}")));
    }
    let goe_eigs = spectral::eigenvalues(&sample_goe(n, seed)?)?;

    let mut rng_span = seed.rng(Stream::HaarSpan);
    let (frame, span_dim, sample_spectrum) = sample_frame(sample, &mut rng_span)?;
    let rotation = haar_orthogonal(&mut rng_span, big_n);
    let v_block = &frame * &rotation;
    drop(frame);

    let mut rng_perp = seed.rng(Stream::HaarComplement);
    let perp = complement_frame(v_block.as_ref(), n - big_n, &mut rng_perp);
    let v_basis = hcat(v_block.as_ref(), perp.as_ref());
    drop(v_block);
    drop(perp);

    let mut scaled = v_basis.clone();
    for (k, &l) in goe_eigs.iter().enumerate() {
        scaled.col_mut(k).iter_mut().for_each(|x| *x *= l);
    }
    let w = SymMatrix::symmetrize((&scaled * v_basis.transpose()).as_ref());

    Ok(EmbeddedInstance { w, v_basis, goe_eigs, span_dim, big_n, sample_spectrum })
}

/// `Q` iff `certifier(W) <= 2 - eps` on the embedded instance. A degenerate
/// planted sample is labelled `P` without running the certifier.
pub fn detect<F>(sample: &WishartSample, certifier: F, eps: f64, seed: SeedSpec) -> Result<Verdict>
where
    F: FnOnce(&SymMatrix) -> Result<f64>,
{
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if sample.degenerate {
        return Ok(Verdict { label: Label::P, certificate_value: f64::NAN, threshold: 2.0 - eps });
    }
    let inst = embed_wishart(sample, seed)?;
    Ok(verdict(certifier(&inst.w)?, eps))
}

/// Thresholds a certificate value at `2 - eps`.
pub fn verdict(certificate_value: f64, eps: f64) -> Verdict {
    let threshold = 2.0 - eps;
    let label = if certificate_value <= threshold { Label::Q } else { Label::P };
    Verdict { label, certificate_value, threshold }
}

/// Every quantity in the chain bounding `ẑᵀWẑ` from below.
pub fn reduction_diagnostics(sample: &WishartSample, inst: &EmbeddedInstance) -> Result<ReductionDiagnostics> {
    let u = sample
        .spike
        .as_ref()
        .filter(|_| sample.planted)
        .ok_or_else(|| Error::InvalidParameter("diagnostics need a planted sample".into()))?;
    if sample.degenerate || inst.span_dim == 0 {
        return Err(Error::Degenerate("sample span is zero".into()));
    }
    if inst.n() != sample.n || inst.big_n != sample.big_n {
        return Err(Error::DimensionMismatch { expected: sample.n, got: inst.n() });
    }
    let zhat = make_zhat(u, sample.rho)?;
    let zu_overlap = dot(&zhat, u);
    let zhat_sample_energy = sample.projected_energy(&zhat);
    let top = inst.sample_spectrum[inst.big_n - 1];
    let mu = inst
        .sample_spectrum
        .iter()
        .copied()
        .find(|&l| l > SPAN_REL_TOL * top)
        .expect("span_dim > 0 implies a nonzero eigenvalue");

    let coeffs = inst.v_basis.transpose() * faer::ColRef::from_slice(&zhat);
    let s: f64 = (0..inst.big_n).map(|i| coeffs[i] * coeffs[i]).sum();
    let z_w_z = spectral::quadratic_form(&inst.w, &zhat)?;
    let lambda_1 = inst.goe_eigs[0];
    let lambda_n1 = inst.goe_eigs[inst.big_n];
    let bound_rhs = lambda_n1 - (lambda_n1 - lambda_1) * s;
    Ok(ReductionDiagnostics { zu_overlap, zhat_sample_energy, mu, s, z_w_z, lambda_1, lambda_n1, bound_rhs })
}
