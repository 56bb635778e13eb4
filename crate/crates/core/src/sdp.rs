//! Operator-splitting solver for the doubly-nonnegative relaxation
//!
//! ```text
//! SDP(W) = max <X, W>  s.t.  X ⪰ 0,  X >= 0,  Tr X = 1
//! ```
//!
//! written as `min -<X, W> + I_C1(X) + I_C2(Z)` subject to `X = Z`, with
//! `C1 = {X ⪰ 0, Tr X = 1}` and `C2 = {Z >= 0}`. Scaled ADMM with
//! over-relaxation `a`:
//!
//! ```text
//! X  <- Π_C1(Z - U + W / rho)
//! X̂  <- a X + (1 - a) Z
//! Z  <- max(0, X̂ + U)
//! U  <- U + X̂ - Z = min(0, X̂ + U_old)
//! ```
//!
//! The last identity keeps `U <= 0` entrywise at every iterate, so
//! `Y = -rho U` is always a valid certificate for the dual
//! `SDP*(W) = min_{Y >= 0} λmax(W + Y)`: `λmax(W + Y)` is an upper bound on
//! `SDP(W)` for any `Y >= 0`, tight at the optimum.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::spectral::{self, eigh};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpConfig {
    /// ADMM penalty parameter.
    pub step_rho: f64,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub max_iters: usize,
    /// In `[1.0, 1.9]`.
    pub over_relaxation: f64,
    /// Residuals are evaluated every `check_every` iterations.
    pub check_every: usize,
    /// Residual balancing of `step_rho` at checkpoints. Off by default so
    /// runs are reproducible across tolerance changes.
    pub adaptive_rho: bool,
}

impl Default for SdpConfig {
    fn default() -> Self {
        Self {
            step_rho: 1.0,
            primal_tol: 1e-6,
            dual_tol: 1e-6,
            max_iters: 50_000,
            over_relaxation: 1.5,
            check_every: 25,
            adaptive_rho: false,
        }
    }
}

impl SdpConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("step_rho", self.step_rho)?;
        positive("primal_tol", self.primal_tol)?;
        positive("dual_tol", self.dual_tol)?;
        if self.max_iters == 0 || self.check_every == 0 {
            return Err(Error::InvalidParameter("max_iters and check_every must be positive".into()));
        }
        if !(1.0..=1.9).contains(&self.over_relaxation) {
            return Err(Error::InvalidParameter(format!(
                "over_relaxation must lie in [1.0, 1.9], got {}",
                self.over_relaxation
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Converged,
    MaxIters,
    NumericFailure,
}

/// Residuals recorded at one checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualCheckpoint {
    pub iter: usize,
    /// `‖X - Z‖_F`
    pub primal: f64,
    /// `rho ‖Z - Z_prev‖_F`
    pub dual: f64,
    /// `max(primal / eps_primal, dual / eps_dual)`; `<= 1` means converged.
    pub combined: f64,
    pub step_rho: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// Feasible primal point: PSD, unit trace and entrywise nonnegative.
    pub x_opt: SymMatrix,
    /// `<x_opt, W>`, a lower bound on `SDP(W)`.
    pub value: f64,
    /// Dual certificate, entrywise nonnegative.
    pub y_dual: SymMatrix,
    /// `λmax(W + y_dual)`, an upper bound on `SDP(W)`.
    pub dual_value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iters: usize,
    pub status: SdpStatus,
    /// False when dual recovery had to clip more than a negligible mass.
    pub dual_usable: bool,
    pub history: Vec<ResidualCheckpoint>,
}

impl SdpSolution {
    pub fn duality_gap(&self) -> f64 {
        self.dual_value - self.value
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub min_eigenvalue: f64,
    /// `|Tr X - 1|`
    pub trace_error: f64,
    pub min_entry: f64,
    pub feasible: bool,
}

/// Dual matrix recovered from the splitting multiplier.
#[derive(Clone, Debug)]
pub struct DualCertificate {
    pub y: SymMatrix,
    /// Frobenius norm of the negative part removed by clipping.
    pub clipped_mass: f64,
    /// `clipped_mass <= 1e-6 ‖Y‖_F`.
    pub usable: bool,
}

/// Euclidean projection of `v` onto the probability simplex.
///
/// Sorted cumulative-sum algorithm; the threshold is found on the
/// descending order of `v`, ties broken by position.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (k as f64 + 1.0);
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Euclidean projection onto `{X ⪰ 0, Tr X = 1}`: the eigenvalues are
/// projected onto the probability simplex and the matrix reassembled as
/// `B Bᵀ` with `B = V_+ diag(sqrt(p_+))`, which is PSD by construction.
pub fn project_psd_trace_simplex(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = eigh(m)?;
    let p = project_simplex(&eig.values);
    Ok(assemble_from_weights(&eig.vectors, &p))
}

fn assemble_from_weights(vectors: &Mat<f64>, weights: &[f64]) -> SymMatrix {
    let n = vectors.nrows();
    let support: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] > 0.0).collect();
    let mut b = Mat::<f64>::zeros(n, support.len());
    for (c, &k) in support.iter().enumerate() {
        let s = weights[k].sqrt();
        for i in 0..n {
            b[(i, c)] = vectors[(i, k)] * s;
        }
    }
    let x = &b * b.transpose();
    SymMatrix::symmetrize(x.as_ref())
}

/// Feasibility of `x` for the SDP constraint set at tolerance `tol`.
pub fn check_feasibility(x: &SymMatrix, tol: f64) -> FeasibilityReport {
    let min_eigenvalue = spectral::eigenvalues(x).map(|v| v[0]).unwrap_or(f64::NAN);
    let trace_error = (x.trace() - 1.0).abs();
    let min_entry = x.min_entry();
    let feasible = min_eigenvalue >= -tol && trace_error <= tol && min_entry >= -tol;
    FeasibilityReport { min_eigenvalue, trace_error, min_entry, feasible }
}

/// `λmax(w)`: the spectral certificate, an upper bound on `λ⁺(w)` for every `w`.
pub fn certify_lambda_max(w: &SymMatrix) -> Result<f64> {
    spectral::lambda_max(w)
}

/// `Y = -rho U`, symmetrized with its negative part clipped.
pub fn recover_dual(scaled_multiplier: &SymMatrix, step_rho: f64) -> DualCertificate {
    let raw = scaled_multiplier.scaled(-step_rho);
    let y = raw.map(|v| v.max(0.0));
    let clipped_mass = raw.lin_comb(1.0, &y, -1.0).map_or(f64::INFINITY, |d| d.frobenius_norm());
    let usable = clipped_mass <= 1e-6 * y.frobenius_norm().max(f64::MIN_POSITIVE);
    DualCertificate { y, clipped_mass, usable }
}

/// Scales a certificate down to `t* Y`, with `t*` the smallest `t` in
/// `[0, 1]` such that `λmax(w + tY)` stays within rounding of `λmax(w + Y)`.
///
/// `t -> λmax(w + tY)` is convex, so the admissible `t` form an interval
/// ending at 1 and bisection finds its left end. Returns the scaled
/// certificate and its value.
pub fn shrink_certificate(w: &SymMatrix, y: &SymMatrix) -> Result<(SymMatrix, f64)> {
    let f = |t: f64| spectral::lambda_max(&w.lin_comb(1.0, y, t)?);
    let full = f(1.0)?;
    let slack = 1e-10 * full.abs().max(1.0);
    if f(0.0)? <= full + slack {
        return Ok((SymMatrix::zeros(w.n())?, f(0.0)?));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? <= full + slack {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi == 1.0 {
        return Ok((y.clone(), full));
    }
    let scaled = y.scaled(hi);
    let value = spectral::lambda_max(&w.add(&scaled)?)?;
    Ok((scaled, value))
}

/// Smallest `t` in `[0, 1]` with `(1 - t) x_ij + t / n >= 0` for all entries.
fn nonnegativity_mix(x: &SymMatrix) -> f64 {
    let n = x.n() as f64;
    let m = x.min_entry();
    if m >= 0.0 {
        0.0
    } else {
        (-m * n / (1.0 - m * n)).min(1.0)
    }
}

/// Moves a point of `{X ⪰ 0, Tr X = 1}` toward `11ᵀ/n` by the least amount
/// that makes it entrywise nonnegative. Trace and PSD-ness are preserved.
pub fn restore_nonnegativity(x: &SymMatrix) -> SymMatrix {
    let t = nonnegativity_mix(x);
    if t == 0.0 {
        return x.clone();
    }
    let inv_n = 1.0 / x.n() as f64;
    // the clamp only removes rounding-level negatives
    x.map(|v| ((1.0 - t) * v + t * inv_n).max(0.0))
}

/// Solves `SDP(w)` by ADMM and recovers the dual certificate.
///
/// The reported primal point is the last `X`-block iterate (exactly in
/// `{X ⪰ 0, Tr X = 1}` up to rounding) mixed with `11ᵀ/n` by the least
/// amount restoring entrywise nonnegativity, so `value` is always the
/// objective of a feasible point.
pub fn solve_primal(w: &SymMatrix, cfg: &SdpConfig) -> Result<SdpSolution> {
    cfg.validate()?;
    w.check_finite()?;
    let n = w.n();
    let nf = n as f64;
    let w_scale = (w.frobenius_norm() / nf.sqrt()).max(f64::MIN_POSITIVE);
    let alpha = cfg.over_relaxation;
    let mut rho = cfg.step_rho;

    let mut z = Mat::<f64>::from_fn(n, n, |i, j| if i == j { 1.0 / nf } else { 0.0 });
    let mut u = Mat::<f64>::zeros(n, n);
    let mut x_last: Option<SymMatrix> = None;
    let mut history = Vec::new();
    let mut status = SdpStatus::MaxIters;
    let mut iters = 0;
    let (mut primal_residual, mut dual_residual) = (f64::INFINITY, f64::INFINITY);

    for k in 1..=cfg.max_iters {
        iters = k;
        let m = SymMatrix::from_upper(n, |i, j| z[(i, j)] - u[(i, j)] + w.get(i, j) / rho)?;
        let x = match project_psd_trace_simplex(&m) {
            Ok(x) if x.find_non_finite().is_none() => x,
            _ => {
                status = SdpStatus::NumericFailure;
                break;
            }
        };

        let checkpoint = k % cfg.check_every == 0 || k == cfg.max_iters;
        let z_prev = if checkpoint { Some(z.clone()) } else { None };
        for j in 0..n {
            for i in 0..n {
                let xh = alpha * x.get(i, j) + (1.0 - alpha) * z[(i, j)];
                let v = xh + u[(i, j)];
                z[(i, j)] = v.max(0.0);
                u[(i, j)] = v.min(0.0);
            }
        }

        if let Some(z_prev) = z_prev {
            let mut r2 = 0.0;
            let mut s2 = 0.0;
            let (mut x2, mut z2, mut u2) = (0.0, 0.0, 0.0);
            for j in 0..n {
                for i in 0..n {
                    let xv = x.get(i, j);
                    r2 += (xv - z[(i, j)]).powi(2);
                    s2 += (z[(i, j)] - z_prev[(i, j)]).powi(2);
                    x2 += xv * xv;
                    z2 += z[(i, j)].powi(2);
                    u2 += u[(i, j)].powi(2);
                }
            }
            primal_residual = r2.sqrt();
            dual_residual = rho * s2.sqrt();
            if !(primal_residual.is_finite() && dual_residual.is_finite()) {
                status = SdpStatus::NumericFailure;
                break;
            }
            let eps_pri = cfg.primal_tol * x2.sqrt().max(z2.sqrt());
            let eps_dual = cfg.dual_tol * (rho * u2.sqrt()).max(w_scale);
            let (rp, rd) = (primal_residual / eps_pri, dual_residual / eps_dual);
            history.push(ResidualCheckpoint {
                iter: k,
                primal: primal_residual,
                dual: dual_residual,
                combined: rp.max(rd),
                step_rho: rho,
            });
            x_last = Some(x);
            if rp <= 1.0 && rd <= 1.0 {
                status = SdpStatus::Converged;
                break;
            }
            if cfg.adaptive_rho {
                const MU: f64 = 10.0;
                const TAU: f64 = 2.0;
                if rp > MU * rd {
                    rho *= TAU;
                    u.col_iter_mut().for_each(|c| c.iter_mut().for_each(|v| *v /= TAU));
                } else if rd > MU * rp {
                    rho /= TAU;
                    u.col_iter_mut().for_each(|c| c.iter_mut().for_each(|v| *v *= TAU));
                }
            }
        } else {
            x_last = Some(x);
        }
    }

    let x_base = match x_last {
        Some(x) => x,
        None => SymMatrix::identity(n)?.scaled(1.0 / nf),
    };
    let x_opt = restore_nonnegativity(&x_base);
    let value = x_opt.dot(w)?;

    let u_sym = SymMatrix::symmetrize(u.as_ref());
    let dual = if u_sym.find_non_finite().is_some() {
        DualCertificate { y: SymMatrix::zeros(n)?, clipped_mass: f64::INFINITY, usable: false }
    } else {
        recover_dual(&u_sym, rho)
    };
    let (y_dual, dual_value) = if dual.usable {
        shrink_certificate(w, &dual.y)?
    } else {
        (dual.y, f64::NAN)
    };

    Ok(SdpSolution {
        x_opt,
        value,
        y_dual,
        dual_value,
        primal_residual,
        dual_residual,
        iters,
        status,
        dual_usable: dual.usable,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_examples() {
        assert_eq!(project_simplex(&[10.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.0; 4]);
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        let p = project_simplex(&[0.3, 0.3, 0.4]);
        assert!((p[0] - 0.3).abs() < 1e-15 && (p[2] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn projection_of_feasible_point_is_identity() {
        let x = SymMatrix::identity(5).unwrap().scaled(0.2);
        let p = project_psd_trace_simplex(&x).unwrap();
        assert!(p.lin_comb(1.0, &x, -1.0).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn projection_of_zero_is_uniform() {
        let p = project_psd_trace_simplex(&SymMatrix::zeros(4).unwrap()).unwrap();
        let want = SymMatrix::identity(4).unwrap().scaled(0.25);
        assert!(p.lin_comb(1.0, &want, -1.0).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn projection_of_large_diagonal() {
        let p = project_psd_trace_simplex(&SymMatrix::from_diagonal(&[10.0, 0.0]).unwrap()).unwrap();
        let want = SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(p.lin_comb(1.0, &want, -1.0).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SdpConfig::default().validate().is_ok());
        let bad = SdpConfig { over_relaxation: 2.0, ..SdpConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SdpConfig { step_rho: 0.0, ..SdpConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SdpConfig { check_every: 0, ..SdpConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn feasibility_examples() {
        assert!(check_feasibility(&SymMatrix::identity(4).unwrap().scaled(0.25), 1e-9).feasible);
        assert!(check_feasibility(&SymMatrix::outer(&[1.0, 0.0, 0.0]).unwrap(), 1e-9).feasible);
        let r = check_feasibility(&SymMatrix::from_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap(), 1e-9);
        assert!(!r.feasible);
        assert_eq!(r.min_entry, -0.5);
        assert!(r.min_eigenvalue.abs() < 1e-12 && r.trace_error < 1e-15);
    }

    #[test]
    fn lambda_max_certificate() {
        assert!((certify_lambda_max(&SymMatrix::from_diagonal(&[2.0, 0.0]).unwrap()).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn restoring_nonnegativity_keeps_trace_and_psd() {
        let v = [0.8, -0.6];
        let x = SymMatrix::outer(&v).unwrap();
        let fixed = restore_nonnegativity(&x);
        let rep = check_feasibility(&fixed, 1e-12);
        assert!(rep.feasible, "{rep:?}");
        assert!(fixed.min_entry().abs() < 1e-15);
    }

    #[test]
    fn dual_recovery_reports_clipping() {
        let u = SymMatrix::from_rows(&[&[0.0, -1.0], &[-1.0, 0.0]]).unwrap();
        let d = recover_dual(&u, 2.0);
        assert!(d.usable && d.clipped_mass == 0.0);
        assert_eq!(d.y.get(0, 1), 2.0);
        let u = SymMatrix::from_rows(&[&[0.0, 1.0], &[1.0, -1.0]]).unwrap();
        let d = recover_dual(&u, 1.0);
        assert!(!d.usable);
        assert!(d.y.min_entry() >= 0.0);
    }

    #[test]
    fn identity_objective_has_unit_value() {
        let w = SymMatrix::identity(2).unwrap();
        let sol = solve_primal(&w, &SdpConfig::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Converged);
        assert!((sol.value - 1.0).abs() < 1e-9);
        assert!((sol.dual_value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn non_finite_objective_is_rejected() {
        let mut w = SymMatrix::identity(2).unwrap();
        w.set(0, 0, f64::NAN);
        assert!(matches!(solve_primal(&w, &SdpConfig::default()), Err(Error::NonFinite { .. })));
    }
}
