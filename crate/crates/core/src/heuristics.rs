//! Lower bounds on `λ⁺(W) = max { xᵀWx : ‖x‖ = 1, x >= 0 }`.
//!
//! Every routine returns an explicit feasible point, so its value is a
//! certified lower bound on `λ⁺(W)` and hence on `SDP(W)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{norm, SymMatrix};
use crate::seed::{SeedSpec, Stream};
use crate::spectral::{eigh, quadratic_form, EigenPair};

/// Largest dimension accepted by [`lambda_plus_bruteforce`].
pub const BRUTEFORCE_MAX_N: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasiblePoint {
    pub x: Vec<f64>,
    /// `xᵀWx`
    pub value: f64,
}

impl FeasiblePoint {
    fn evaluate(w: &SymMatrix, x: Vec<f64>) -> Result<Self> {
        let value = quadratic_form(w, &x)?;
        Ok(Self { x, value })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentConfig {
    /// Spectral shift `c` of the iteration matrix `W + cI`.
    pub shift: f64,
    pub max_iters: usize,
    /// A trajectory stops once one step improves the objective by less.
    pub value_tol: f64,
    /// Random nonnegative starts, in addition to the truncated eigenvector.
    pub restarts: usize,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self { shift: 2.1, max_iters: 2000, value_tol: 1e-10, restarts: 8 }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.shift > 0.0 && self.shift.is_finite()) {
            return Err(Error::InvalidParameter(format!("shift must be positive, got {}", self.shift)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if !(self.value_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("value_tol must be nonnegative, got {}", self.value_tol)));
        }
        Ok(())
    }
}

/// One run of the projected power iteration.
#[derive(Clone, Debug)]
pub struct AscentTrace {
    pub point: FeasiblePoint,
    /// `xᵀWx` at the start and after every step.
    pub objective: Vec<f64>,
    pub converged: bool,
    pub shift: f64,
}

fn positive_part(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

fn normalized(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let s = norm(&v);
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
        Some(v)
    } else {
        None
    }
}

fn truncate_top(eig: &EigenPair) -> Result<Vec<f64>> {
    let v = eig.top_vector();
    let plus = positive_part(&v);
    let minus: Vec<f64> = v.iter().map(|&x| (-x).max(0.0)).collect();
    let pick = if norm(&minus) > norm(&plus) { minus } else { plus };
    normalized(pick).ok_or_else(|| Error::Degenerate("top eigenvector has no nonzero part of either sign".into()))
}

/// Positive part of the top eigenvector, normalized. The eigenvector sign
/// is chosen so that the kept part has the larger norm.
pub fn truncated_top_eigenvector(w: &SymMatrix) -> Result<FeasiblePoint> {
    let eig = eigh(w)?;
    FeasiblePoint::evaluate(w, truncate_top(&eig)?)
}

/// Shift used by [`local_ascent`]: `requested` when `W + cI` is PSD,
/// otherwise the spectral norm of `W` plus `0.1`.
pub fn effective_shift(requested: f64, eigenvalues: &[f64]) -> f64 {
    let lmin = eigenvalues[0];
    let lmax = eigenvalues[eigenvalues.len() - 1];
    if requested >= -lmin {
        requested
    } else {
        lmax.abs().max(lmin.abs()) + 0.1
    }
}

/// Iterates `x <- normalize(max(0, (W + shift I) x))` from `start`.
///
/// With `W + shift I` PSD the objective is nondecreasing along the
/// trajectory. Stops after `max_iters` steps or when a step gains less
/// than `value_tol`.
pub fn ascent_trajectory(
    w: &SymMatrix,
    shift: f64,
    start: &[f64],
    max_iters: usize,
    value_tol: f64,
) -> Result<AscentTrace> {
    if start.len() != w.n() {
        return Err(Error::DimensionMismatch { expected: w.n(), got: start.len() });
    }
    let mut x = normalized(positive_part(start))
        .ok_or_else(|| Error::Degenerate("start has no positive entries".into()))?;
    let mut value = quadratic_form(w, &x)?;
    let mut objective = vec![value];
    let mut converged = false;
    for _ in 0..max_iters {
        let mut y = w.matvec(&x)?;
        y.iter_mut().zip(&x).for_each(|(yi, xi)| *yi += shift * xi);
        let Some(next) = normalized(positive_part(&y)) else {
            return Err(Error::Degenerate("iterate collapsed to zero".into()));
        };
        let next_value = quadratic_form(w, &next)?;
        x = next;
        objective.push(next_value);
        let gain = next_value - value;
        value = next_value;
        if gain.abs() < value_tol {
            converged = true;
            break;
        }
    }
    Ok(AscentTrace { point: FeasiblePoint { x, value }, objective, converged, shift })
}

/// Starts used by [`local_ascent`]: the truncated top eigenvector followed
/// by `cfg.restarts` vectors with i.i.d. `|N(0,1)|` entries.
pub fn ascent_starts(w: &SymMatrix, eig: &EigenPair, restarts: usize, seed: SeedSpec) -> Result<Vec<Vec<f64>>> {
    let n = w.n();
    let mut rng = seed.rng(Stream::Restarts);
    let mut starts = Vec::with_capacity(restarts + 1);
    starts.push(truncate_top(eig)?);
    for _ in 0..restarts {
        let v: Vec<f64> = (0..n).map(|_| crate::ensembles::gaussian(&mut rng).abs()).collect();
        starts.push(v);
    }
    Ok(starts)
}

/// Best point found by projected power iteration over all starts. Ties are
/// broken by the lowest start index, the truncated eigenvector being first.
pub fn local_ascent(w: &SymMatrix, cfg: &AscentConfig, seed: SeedSpec) -> Result<FeasiblePoint> {
    cfg.validate()?;
    w.check_finite()?;
    let eig = eigh(w)?;
    let shift = effective_shift(cfg.shift, &eig.values);
    let starts = ascent_starts(w, &eig, cfg.restarts, seed)?;
    let results: Vec<Option<FeasiblePoint>> = starts
        .par_iter()
        .map(|s| ascent_trajectory(w, shift, s, cfg.max_iters, cfg.value_tol).ok().map(|t| t.point))
        .collect();
    let mut best: Option<FeasiblePoint> = None;
    for p in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| p.value > b.value) {
            best = Some(p);
        }
    }
    best.ok_or_else(|| Error::Degenerate("every ascent trajectory collapsed to zero".into()))
}

fn angles_to_point(theta: &[f64], x: &mut [f64]) {
    let mut s = 1.0;
    for (k, &t) in theta.iter().enumerate() {
        x[k] = s * t.cos();
        s *= t.sin();
    }
    x[theta.len()] = s;
}

/// Grid search over the nonnegative part of the unit sphere in spherical
/// coordinates, `grid_points` values per angle on `[0, π/2]`, followed by a
/// shrinking-pattern polish of the best grid point.
pub fn lambda_plus_bruteforce(w: &SymMatrix, grid_points: usize) -> Result<FeasiblePoint> {
    let n = w.n();
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::TooLarge { n, limit: BRUTEFORCE_MAX_N });
    }
    if grid_points < 50 {
        return Err(Error::InvalidParameter(format!("grid_points must be at least 50, got {grid_points}")));
    }
    w.check_finite()?;
    if n == 1 {
        return FeasiblePoint::evaluate(w, vec![1.0]);
    }
    let d = n - 1;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let step = half_pi / (grid_points - 1) as f64;
    let mut x = vec![0.0; n];
    let mut eval = |theta: &[f64]| {
        angles_to_point(theta, &mut x);
        quadratic_form(w, &x).expect("dimension matches")
    };

    let mut idx = vec![0usize; d];
    let mut theta = vec![0.0; d];
    let mut best_theta = theta.clone();
    let mut best = f64::NEG_INFINITY;
    'grid: loop {
        for k in 0..d {
            theta[k] = idx[k] as f64 * step;
        }
        let v = eval(&theta);
        if v > best {
            best = v;
            best_theta.copy_from_slice(&theta);
        }
        for i in idx.iter_mut() {
            *i += 1;
            if *i < grid_points {
                continue 'grid;
            }
            *i = 0;
        }
        break;
    }

    // pattern search on the box [0, π/2]^d around the best grid point
    let mut h = step;
    let mut trial = vec![0.0; d];
    while h > 1e-13 {
        let mut improved = false;
        let offsets = 3usize.pow(d as u32);
        for code in 0..offsets {
            let mut c = code;
            for k in 0..d {
                let o = (c % 3) as f64 - 1.0;
                c /= 3;
                trial[k] = (best_theta[k] + o * h).clamp(0.0, half_pi);
            }
            let v = eval(&trial);
            if v > best {
                best = v;
                best_theta.copy_from_slice(&trial);
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    let mut point = vec![0.0; n];
    angles_to_point(&best_theta, &mut point);
    let point: Vec<f64> = point.into_iter().map(|v| v.max(0.0)).collect();
    FeasiblePoint::evaluate(w, normalized(point).expect("point on the sphere"))
}
