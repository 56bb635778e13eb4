//! Explicit primal witness for the relaxation on GOE inputs.
//!
//! For a rank-`r` projector `P` onto the top eigenspace of `W`,
//!
//! ```text
//! X(α) = (1 - α) P / r + α 11ᵀ / n
//! ```
//!
//! is PSD with unit trace for every `α ∈ [0, 1]`, and entrywise nonnegative
//! once `α >= α_min`. Its objective splits as
//! `(1 - α) · (top-r eigenvalue mean) + α · 1ᵀW1 / n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::sample_goe;
use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::seed::SeedSpec;
use crate::spectral::{eigh, projector_onto_columns, require_projector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub delta: f64,
    pub alpha: f64,
    pub r: usize,
}

impl WitnessParams {
    pub fn new(n: usize, delta: f64, alpha: f64) -> Result<Self> {
        let r = rank_for(n, delta)?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(Self { delta, alpha, r })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub n: usize,
    pub delta: f64,
    pub r: usize,
    pub trial: usize,
    pub seed: Option<SeedSpec>,
    pub alpha_min: f64,
    /// `max(0, -min_{i != j} P_ij)`
    pub p_max_neg: f64,
    /// `<X(alpha_min), W>`
    pub value: f64,
    /// Mean of the top `r` eigenvalues of `W`.
    pub top_mean: f64,
    /// `1ᵀW1 / n`
    pub ones_term: f64,
}

/// `r = round(delta n)`, required to lie in `1..=n`.
pub fn rank_for(n: usize, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    let r = (delta * n as f64).round() as usize;
    if r == 0 {
        return Err(Error::InvalidParameter(format!("round(delta * n) = 0 for delta = {delta}, n = {n}")));
    }
    Ok(r.min(n))
}

/// `(1 - alpha) P / r + alpha 11ᵀ / n` with `r = round(delta n)`.
pub fn build_witness(p: &SymMatrix, alpha: f64, delta: f64, n: usize) -> Result<SymMatrix> {
    if p.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.n() });
    }
    let params = WitnessParams::new(n, delta, alpha)?;
    let a = (1.0 - alpha) / params.r as f64;
    let b = alpha / n as f64;
    Ok(p.map(|v| a * v + b))
}

/// Smallest `alpha` making every off-diagonal entry of the witness
/// nonnegative: `p0 / (r/n + p0)` with `p0 = max(0, -min_{i != j} P_ij)`.
pub fn minimal_alpha(p: &SymMatrix, delta: f64) -> Result<f64> {
    require_projector(p)?;
    let n = p.n();
    let r = rank_for(n, delta)?;
    let tr = p.trace();
    if (tr - r as f64).abs() > 1e-6 * r as f64 {
        return Err(Error::ContractViolation(format!(
            "projector has trace {tr}, expected rank round(delta * n) = {r}"
        )));
    }
    Ok(alpha_from_violation(max_negative_offdiag(p), r, n))
}

fn max_negative_offdiag(p: &SymMatrix) -> f64 {
    if p.n() == 1 {
        0.0
    } else {
        (-p.min_offdiag()).max(0.0)
    }
}

fn alpha_from_violation(p0: f64, r: usize, n: usize) -> f64 {
    if p0 == 0.0 {
        0.0
    } else {
        p0 / (r as f64 / n as f64 + p0)
    }
}

/// Builds the witness at `alpha_min` for the top `round(delta n)`
/// eigenspace of `w` and evaluates its objective.
pub fn witness_value(w: &SymMatrix, delta: f64) -> Result<WitnessReport> {
    let n = w.n();
    let r = rank_for(n, delta)?;
    let eig = eigh(w)?;
    let top_mean = eig.values[n - r..].iter().sum::<f64>() / r as f64;
    let p = projector_onto_columns(eig.vectors.as_ref().subcols(n - r, r));
    drop(eig);

    let p_max_neg = max_negative_offdiag(&p);
    let alpha_min = alpha_from_violation(p_max_neg, r, n);
    let ones_term = w.total_sum() / n as f64;
    // <X, W> = (1 - α) <P, W> / r + α 1ᵀW1 / n, with <P, W> taken entrywise
    let pw = p.dot(w)?;
    let value = (1.0 - alpha_min) * pw / r as f64 + alpha_min * ones_term;

    Ok(WitnessReport { n, delta, r, trial: 0, seed: None, alpha_min, p_max_neg, value, top_mean, ones_term })
}

/// Witness reports for `trials` GOE draws at each size in `n_list`, seeded
/// by [`SeedSpec::grid`]. Output is ordered by `(n, trial)`.
pub fn witness_scaling_experiment(
    n_list: &[usize],
    delta: f64,
    trials: usize,
    master_seed: u64,
) -> Result<Vec<WitnessReport>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    for &n in n_list {
        rank_for(n, delta)?;
    }
    let jobs: Vec<(usize, usize)> =
        n_list.iter().flat_map(|&n| (0..trials).map(move |t| (n, t))).collect();
    jobs.into_par_iter()
        .map(|(n, trial)| {
            let seed = SeedSpec::grid(master_seed, n, trial);
            let w = sample_goe(n, seed)?;
            let mut rep = witness_value(&w, delta)?;
            rep.trial = trial;
            rep.seed = Some(seed);
            Ok(rep)
        })
        .collect()
}
