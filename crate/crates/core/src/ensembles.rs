//! Samplers for the random matrix and sample models.
//!
//! GOE normalization: diagonal entries have variance `2/n` and off-diagonal
//! entries variance `1/n`, so the spectrum fills `[-2, 2]` and
//! `1ᵀW1/n ~ N(0, 2/n)`.
//!
//! Every sampler is a pure function of its parameters and a [`SeedSpec`].

use faer::Mat;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, SymMatrix};
use crate::seed::{SeedSpec, Stream};

/// How the spike of a spiked Wigner matrix is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    /// Uniform on the unit sphere.
    Sphere,
    /// `|v|` entrywise for `v` uniform on the sphere.
    PositiveOrthant,
    /// Supplied by the caller.
    Explicit,
}

#[derive(Clone, Debug)]
pub struct SpikedWignerSample {
    pub matrix: SymMatrix,
    pub beta: f64,
    /// Unit-norm spike; `None` iff `beta == 0`.
    pub spike: Option<Vec<f64>>,
    pub prior_kind: PriorKind,
}

/// Parameters of the centered two-point spike prior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenteredBernoulliParams {
    pub rho: f64,
    pub n: usize,
}

impl CenteredBernoulliParams {
    pub fn new(rho: f64, n: usize) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!("rho must lie in (0, 1), got {rho}")));
        }
        if n == 0 {
            return Err(Error::InvalidDimension("n must be at least 1".into()));
        }
        Ok(Self { rho, n })
    }

    /// Value taken with probability `rho`.
    pub fn high(&self) -> f64 {
        ((1.0 - self.rho) / (self.rho * self.n as f64)).sqrt()
    }

    /// Value taken with probability `1 - rho`.
    pub fn low(&self) -> f64 {
        -(self.rho / ((1.0 - self.rho) * self.n as f64)).sqrt()
    }
}

/// `N` samples in `R^n` from the null or the planted spiked Wishart model.
#[derive(Clone, Debug)]
pub struct WishartSample {
    /// `n x N`, one sample per column.
    pub samples: Mat<f64>,
    pub n: usize,
    pub big_n: usize,
    pub planted: bool,
    /// Present iff `planted`.
    pub spike: Option<Vec<f64>>,
    pub beta: f64,
    pub rho: f64,
    /// `n / N`.
    pub gamma: f64,
    /// The all-zero branch (`beta ‖u‖² <= -1`) fired.
    pub degenerate: bool,
}

impl WishartSample {
    pub fn sample(&self, k: usize) -> Vec<f64> {
        self.samples.col(k).iter().copied().collect()
    }

    /// `(1/N) Σ <x, y_i>²`.
    pub fn projected_energy(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.big_n {
            let col = self.samples.col(k);
            let p: f64 = (0..self.n).map(|i| col[i] * x[i]).sum();
            acc += p * p;
        }
        acc / self.big_n as f64
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub(crate) fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Draws `W ~ GOE(n)` from stream [`Stream::Goe`].
pub fn sample_goe(n: usize, seed: SeedSpec) -> Result<SymMatrix> {
    check_n(n)?;
    let mut rng = seed.rng(Stream::Goe);
    let off = (1.0 / n as f64).sqrt();
    let diag = (2.0 / n as f64).sqrt();
    SymMatrix::from_upper(n, |i, j| {
        let g = gaussian(&mut rng);
        if i == j {
            g * diag
        } else {
            g * off
        }
    })
}

/// Uniform point on `S^{n-1}`; an all-zero Gaussian draw is redrawn.
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let mut v = gaussian_vec(rng, n);
        let r = norm(&v);
        if r > 0.0 {
            v.iter_mut().for_each(|x| *x /= r);
            return v;
        }
    }
}

/// `W = W₀ + beta u uᵀ` with `W₀ ~ GOE(n)` and `u` drawn from `prior`.
///
/// `W₀` comes from the same stream as [`sample_goe`], so `beta = 0` returns
/// exactly `sample_goe(n, seed)`. The [`PriorKind::Explicit`] prior requires
/// [`plant_spike`] instead.
pub fn sample_spiked_wigner(
    n: usize,
    beta: f64,
    prior: PriorKind,
    seed: SeedSpec,
) -> Result<SpikedWignerSample> {
    check_beta_wigner(beta)?;
    let goe = sample_goe(n, seed)?;
    if beta == 0.0 {
        return Ok(SpikedWignerSample { matrix: goe, beta, spike: None, prior_kind: prior });
    }
    let mut rng = seed.rng(Stream::Spike);
    let spike = match prior {
        PriorKind::Sphere => uniform_sphere(&mut rng, n),
        PriorKind::PositiveOrthant => {
            uniform_sphere(&mut rng, n).into_iter().map(f64::abs).collect()
        }
        PriorKind::Explicit => {
            return Err(Error::InvalidParameter(
                "the explicit prior needs a caller-supplied spike; use plant_spike".into(),
            ))
        }
    };
    let matrix = add_rank_one(&goe, beta, &spike);
    Ok(SpikedWignerSample { matrix, beta, spike: Some(spike), prior_kind: prior })
}

/// `W = W₀ + beta ŝ ŝᵀ` for a caller-supplied spike `s`, normalized to unit length.
pub fn plant_spike(base: &SymMatrix, beta: f64, spike: &[f64]) -> Result<SpikedWignerSample> {
    check_beta_wigner(beta)?;
    if spike.len() != base.n() {
        return Err(Error::DimensionMismatch { expected: base.n(), got: spike.len() });
    }
    if beta == 0.0 {
        return Ok(SpikedWignerSample {
            matrix: base.clone(),
            beta,
            spike: None,
            prior_kind: PriorKind::Explicit,
        });
    }
    let r = norm(spike);
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter("spike must be a nonzero finite vector".into()));
    }
    let unit: Vec<f64> = spike.iter().map(|x| x / r).collect();
    Ok(SpikedWignerSample {
        matrix: add_rank_one(base, beta, &unit),
        beta,
        spike: Some(unit),
        prior_kind: PriorKind::Explicit,
    })
}

fn check_beta_wigner(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be finite and >= 0, got {beta}")));
    }
    Ok(())
}

fn add_rank_one(base: &SymMatrix, beta: f64, u: &[f64]) -> SymMatrix {
    let mut out = base.clone();
    let n = base.n();
    for j in 0..n {
        for i in 0..=j {
            out.set(i, j, base.get(i, j) + beta * u[i] * u[j]);
        }
    }
    out
}

/// Spike from the centered Bernoulli prior, stream [`Stream::Spike`].
pub fn sample_centered_bernoulli(params: CenteredBernoulliParams, seed: SeedSpec) -> Result<Vec<f64>> {
    let params = CenteredBernoulliParams::new(params.rho, params.n)?;
    let mut rng = seed.rng(Stream::Spike);
    Ok(draw_centered_bernoulli(&params, &mut rng))
}

fn draw_centered_bernoulli<R: Rng + ?Sized>(params: &CenteredBernoulliParams, rng: &mut R) -> Vec<f64> {
    let (hi, lo) = (params.high(), params.low());
    (0..params.n)
        .map(|_| if rng.random::<f64>() < params.rho { hi } else { lo })
        .collect()
}

/// Spiked Wishart samples.
///
/// Null: `N` i.i.d. `N(0, I_n)` vectors. Planted: `u ~ X_rho`; if
/// `beta ‖u‖² <= -1` every sample is zero, otherwise each sample is
/// `y = g + (sqrt(1 + beta ‖u‖²) - 1) <û, g> û` for `g ~ N(0, I_n)`, which has
/// covariance exactly `I + beta u uᵀ`.
pub fn sample_spiked_wishart(
    n: usize,
    big_n: usize,
    beta: f64,
    rho: f64,
    planted: bool,
    seed: SeedSpec,
) -> Result<WishartSample> {
    check_n(n)?;
    if big_n == 0 {
        return Err(Error::InvalidDimension("N must be at least 1".into()));
    }
    if !(beta > -1.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be finite and > -1, got {beta}")));
    }
    let params = CenteredBernoulliParams::new(rho, n)?;
    let gamma = n as f64 / big_n as f64;

    let mut sample = WishartSample {
        samples: Mat::zeros(n, big_n),
        n,
        big_n,
        planted,
        spike: None,
        beta,
        rho,
        gamma,
        degenerate: false,
    };

    let mut rng = seed.rng(Stream::Samples);
    if !planted {
        for k in 0..big_n {
            for i in 0..n {
                sample.samples[(i, k)] = gaussian(&mut rng);
            }
        }
        return Ok(sample);
    }

    let u = draw_centered_bernoulli(&params, &mut seed.rng(Stream::Spike));
    let u_norm_sq = dot(&u, &u);
    sample.spike = Some(u.clone());
    if beta * u_norm_sq <= -1.0 {
        sample.degenerate = true;
        return Ok(sample);
    }
    let u_norm = u_norm_sq.sqrt();
    let u_hat: Vec<f64> = u.iter().map(|x| x / u_norm).collect();
    let stretch = (1.0 + beta * u_norm_sq).sqrt() - 1.0;
    let mut g = vec![0.0; n];
    for k in 0..big_n {
        g.iter_mut().for_each(|x| *x = gaussian(&mut rng));
        let c = stretch * dot(&u_hat, &g);
        for i in 0..n {
            sample.samples[(i, k)] = g[i] + c * u_hat[i];
        }
    }
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goe_rejects_zero_dimension() {
        assert!(matches!(sample_goe(0, SeedSpec::new(1, 0)), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn goe_is_deterministic_and_symmetric() {
        let a = sample_goe(30, SeedSpec::new(5, 2)).unwrap();
        let b = sample_goe(30, SeedSpec::new(5, 2)).unwrap();
        assert_eq!(a, b);
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
        assert_ne!(a, sample_goe(30, SeedSpec::new(5, 3)).unwrap());
    }

    #[test]
    fn single_entry_goe() {
        let w = sample_goe(1, SeedSpec::new(9, 0)).unwrap();
        assert_eq!(w.n(), 1);
        assert!(w.get(0, 0).is_finite());
    }

    #[test]
    fn zero_beta_reproduces_goe() {
        let seed = SeedSpec::new(11, 4);
        let s = sample_spiked_wigner(20, 0.0, PriorKind::Sphere, seed).unwrap();
        assert!(s.spike.is_none());
        assert_eq!(s.matrix, sample_goe(20, seed).unwrap());
    }

    #[test]
    fn negative_beta_is_rejected() {
        let err = sample_spiked_wigner(5, -0.5, PriorKind::Sphere, SeedSpec::new(1, 1)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn positive_orthant_spike_is_nonnegative_unit() {
        for t in 0..20 {
            let s = sample_spiked_wigner(50, 1.5, PriorKind::PositiveOrthant, SeedSpec::new(3, t)).unwrap();
            let u = s.spike.unwrap();
            assert!(u.iter().all(|&x| x >= 0.0));
            assert!((norm(&u) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn explicit_spike_is_normalized() {
        let base = SymMatrix::zeros(3).unwrap();
        let s = plant_spike(&base, 2.0, &[3.0, 0.0, 4.0]).unwrap();
        let u = s.spike.unwrap();
        assert!((u[0] - 0.6).abs() < 1e-15 && (u[2] - 0.8).abs() < 1e-15);
        assert!((s.matrix.get(0, 2) - 2.0 * 0.48).abs() < 1e-15);
        assert!(sample_spiked_wigner(3, 1.0, PriorKind::Explicit, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn symmetric_bernoulli_case_is_plus_minus_inv_sqrt_n() {
        let n = 64;
        let u = sample_centered_bernoulli(CenteredBernoulliParams { rho: 0.5, n }, SeedSpec::new(2, 2)).unwrap();
        let s = 1.0 / (n as f64).sqrt();
        assert!(u.iter().all(|&x| (x.abs() - s).abs() < 1e-15));
    }

    #[test]
    fn bernoulli_rejects_rho_outside_unit_interval() {
        for rho in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(CenteredBernoulliParams::new(rho, 10).is_err());
            let r = sample_centered_bernoulli(CenteredBernoulliParams { rho, n: 10 }, SeedSpec::new(0, 0));
            assert!(matches!(r, Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn bernoulli_entries_have_zero_mean() {
        let p = CenteredBernoulliParams::new(0.1, 10).unwrap();
        let mean = p.rho * p.high() + (1.0 - p.rho) * p.low();
        assert!(mean.abs() < 1e-15);
        let second = p.rho * p.high().powi(2) + (1.0 - p.rho) * p.low().powi(2);
        assert!((second * 10.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn null_wishart_has_requested_shape() {
        let s = sample_spiked_wishart(4, 3, 0.5, 0.3, false, SeedSpec::new(1, 0)).unwrap();
        assert_eq!((s.samples.nrows(), s.samples.ncols()), (4, 3));
        assert!(s.spike.is_none() && !s.degenerate);
        assert!((s.gamma - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn wishart_rejects_beta_at_or_below_minus_one() {
        let r = sample_spiked_wishart(4, 3, -1.0, 0.3, true, SeedSpec::new(1, 0));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
        assert!(sample_spiked_wishart(4, 0, 0.0, 0.3, true, SeedSpec::new(1, 0)).is_err());
    }

    #[test]
    fn degenerate_branch_zeroes_every_sample() {
        // beta = -0.999 with a spike far above unit norm: rho small, n tiny
        // makes ‖u‖² = K (1-rho)/(rho n) + ... large whenever K >= 1.
        let mut seen = false;
        for t in 0..200 {
            let s = sample_spiked_wishart(4, 2, -0.999, 0.05, true, SeedSpec::new(8, t)).unwrap();
            let u = s.spike.as_ref().unwrap();
            let fired = -0.999 * dot(u, u) <= -1.0;
            assert_eq!(fired, s.degenerate);
            if s.degenerate {
                seen = true;
                assert!(s.samples.col_iter().all(|c| c.iter().all(|&x| x == 0.0)));
            }
        }
        assert!(seen, "no degenerate draw in 200 trials");
    }
}
