//! The figure experiments and the reduction demo.

use std::time::Instant;

use anyhow::{Context, Result};
use nnpca::ensembles::{sample_goe, sample_spiked_wishart};
use nnpca::reduction::{embed_wishart, make_zhat, reduction_diagnostics, verdict, Label};
use nnpca::sdp::{solve_primal, SdpConfig, SdpStatus};
use nnpca::spectral::{self, DEFAULT_RANK_TOL};
use nnpca::witness::witness_scaling_experiment;
use nnpca::{SeedSpec, SymMatrix};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::RunOutput;
use crate::plot::{Figure, Panel, Point, Series, SeriesKind};
use crate::record::ExperimentRecord;
use crate::stats::{mean, mean_std, median, Histogram};

/// Bin layout of the spectrum histograms.
pub const SPECTRUM_BINS: usize = 60;
pub const SPECTRUM_RANGE: (f64, f64) = (-2.5, 2.5);
/// Width of the band below `λmax` used for the wall-shape fraction.
pub const WALL_BAND: f64 = 0.25;

/// One solved GOE instance, shared by the primal and dual figures.
#[derive(Clone, Debug)]
pub struct SdpTrial {
    pub n: usize,
    pub trial: usize,
    pub seed: SeedSpec,
    pub status: SdpStatus,
    pub iters: usize,
    pub value: f64,
    pub dual_value: f64,
    pub dual_usable: bool,
    /// Second largest eigenvalue of the primal solution.
    pub second_eig: f64,
    pub numerical_rank: usize,
    pub spectrum_w: Vec<f64>,
    /// Empty when the dual certificate is unusable.
    pub spectrum_wy: Vec<f64>,
    pub wall_time_s: f64,
}

impl SdpTrial {
    pub fn converged(&self) -> bool {
        self.status == SdpStatus::Converged
    }

    pub fn lambda_max_w(&self) -> f64 {
        *self.spectrum_w.last().expect("nonempty spectrum")
    }
}

pub fn sdp_config(cfg: &RunConfig) -> SdpConfig {
    SdpConfig { primal_tol: cfg.tol, dual_tol: cfg.tol, max_iters: cfg.max_iters, ..SdpConfig::default() }
}

fn solve_trial(n: usize, trial: usize, master_seed: u64, solver: &SdpConfig) -> Result<SdpTrial> {
    let seed = SeedSpec::grid(master_seed, n, trial);
    let w = sample_goe(n, seed)?;
    let start = Instant::now();
    let sol = solve_primal(&w, solver).with_context(|| format!("solving trial {trial}"))?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let x_eigs = spectral::eigenvalues(&sol.x_opt)?;
    let spectrum_w = spectral::eigenvalues(&w)?;
    let spectrum_wy = if sol.dual_usable { spectral::eigenvalues(&w.add(&sol.y_dual)?)? } else { Vec::new() };
    Ok(SdpTrial {
        n,
        trial,
        seed,
        status: sol.status,
        iters: sol.iters,
        value: sol.value,
        dual_value: sol.dual_value,
        dual_usable: sol.dual_usable,
        second_eig: x_eigs[n - 2],
        numerical_rank: x_eigs.iter().filter(|&&l| l > DEFAULT_RANK_TOL).count(),
        spectrum_w,
        spectrum_wy,
        wall_time_s,
    })
}

/// Solves `cfg.trials` GOE(`cfg.n()`) instances in parallel.
pub fn sdp_trials(cfg: &RunConfig) -> Result<Vec<SdpTrial>> {
    let solver = sdp_config(cfg);
    solver.validate()?;
    let n = cfg.n();
    (0..cfg.trials).into_par_iter().map(|t| solve_trial(n, t, cfg.master_seed, &solver)).collect()
}

fn status_flag(t: &SdpTrial, rec: &mut ExperimentRecord) {
    match t.status {
        SdpStatus::Converged => {}
        SdpStatus::MaxIters => rec.flag("max_iters"),
        SdpStatus::NumericFailure => rec.flag("numeric_failure"),
    }
}

pub fn primal_output(cfg: &RunConfig, trials: &[SdpTrial]) -> RunOutput {
    let mut records = Vec::new();
    for t in trials {
        let mut rec = ExperimentRecord::new("fig-primal", t.n, t.trial, t.seed)
            .metric("sdp_value", t.value)
            .metric("second_eig", t.second_eig)
            .metric("numerical_rank", t.numerical_rank as f64)
            .metric("iters", t.iters as f64)
            .metric("converged", if t.converged() { 1.0 } else { 0.0 })
            .metric("wall_time_s", t.wall_time_s);
        status_flag(t, &mut rec);
        records.push(rec);
    }

    let ok: Vec<&SdpTrial> = trials.iter().filter(|t| t.converged()).collect();
    let log_e2: Vec<f64> = ok.iter().map(|t| t.second_eig.max(1e-16).log10()).collect();
    let lo = log_e2.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let hi = log_e2.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (-8.0, 0.0) };
    let e2_hist = Histogram::new(lo, hi, (4.0 * (hi - lo)) as usize).counts(&log_e2);
    let values: Vec<f64> = ok.iter().map(|t| t.value).collect();
    let vh = Histogram::new(1.0, 2.0, 40);
    let value_hist = vh.counts(&values);

    let fig = Figure {
        name: "fig_primal".into(),
        panels: vec![
            Panel {
                title: format!("Second eigenvalue of X*, n = {}, {} converged trials", cfg.n(), ok.len()),
                x_label: "log10 second eigenvalue".into(),
                y_label: "trials".into(),
                series: vec![bars("second eigenvalue", &e2_hist)],
                ..Panel::default()
            },
            Panel {
                title: "SDP value".into(),
                x_label: "<X*, W>".into(),
                y_label: "trials".into(),
                series: vec![bars("SDP value", &value_hist)],
                ..Panel::default()
            },
        ],
    };
    RunOutput { config: cfg.clone(), records, figures: vec![fig] }
}

fn bars(name: &str, h: &[(f64, f64, f64)]) -> Series {
    let width = if h.len() > 1 { h[1].0 - h[0].0 } else { 1.0 };
    Series::new(name, SeriesKind::Bars { width }, h.iter().map(|&(x, y, _)| Point::new(x, y)).collect())
}

/// Fraction of `spectrum` (ascending) within `WALL_BAND` of its maximum.
pub fn wall_fraction(spectrum: &[f64]) -> f64 {
    let top = spectrum[spectrum.len() - 1];
    spectrum.iter().filter(|&&l| l >= top - WALL_BAND).count() as f64 / spectrum.len() as f64
}

pub fn dual_output(cfg: &RunConfig, trials: &[SdpTrial]) -> RunOutput {
    let hist = Histogram::new(SPECTRUM_RANGE.0, SPECTRUM_RANGE.1, SPECTRUM_BINS);
    let mut records = Vec::new();
    let mut dens_w = Vec::new();
    let mut dens_wy = Vec::new();
    for t in trials {
        let mut rec = ExperimentRecord::new("fig-dual", t.n, t.trial, t.seed)
            .metric("sdp_value", t.value)
            .metric("lambda_max_w", t.lambda_max_w())
            .metric("wall_fraction_w", wall_fraction(&t.spectrum_w))
            .metric("dual_usable", if t.dual_usable { 1.0 } else { 0.0 });
        status_flag(t, &mut rec);
        if t.dual_usable {
            rec = rec
                .metric("dual_value", t.dual_value)
                .metric("duality_gap", t.dual_value - t.value)
                .metric("wall_fraction_wy", wall_fraction(&t.spectrum_wy))
                .metric("outside_range_wy", hist.outside_fraction(&t.spectrum_wy));
        } else {
            rec.flag("dual_unusable");
        }
        if !rec.is_flagged() {
            dens_w.push(hist.density(&t.spectrum_w));
            dens_wy.push(hist.density(&t.spectrum_wy));
        }
        records.push(rec);
    }

    let centers = hist.centers();
    let mean_bars = |name: &str, dens: &[Vec<f64>]| {
        let points = centers
            .iter()
            .enumerate()
            .map(|(b, &x)| {
                let col: Vec<f64> = dens.iter().map(|d| d[b]).collect();
                let (m, s) = mean_std(&col);
                Point::with_err(x, m, s)
            })
            .collect();
        Series::new(name, SeriesKind::Bars { width: hist.width() }, points)
    };
    let fig = Figure {
        name: "fig_dual".into(),
        panels: vec![Panel {
            title: format!("Mean spectral density over {} trials, n = {}", dens_w.len(), cfg.n()),
            x_label: "eigenvalue".into(),
            y_label: "density".into(),
            series: vec![mean_bars("W", &dens_w), mean_bars("W + Y", &dens_wy)],
            ..Panel::default()
        }],
    };
    RunOutput { config: cfg.clone(), records, figures: vec![fig] }
}

pub fn run_fig_primal(cfg: &RunConfig) -> Result<RunOutput> {
    Ok(primal_output(cfg, &sdp_trials(cfg)?))
}

pub fn run_fig_dual(cfg: &RunConfig) -> Result<RunOutput> {
    Ok(dual_output(cfg, &sdp_trials(cfg)?))
}

pub fn run_fig_witness(cfg: &RunConfig) -> Result<RunOutput> {
    let reports = witness_scaling_experiment(&cfg.n_list, cfg.delta, cfg.trials, cfg.master_seed)?;
    let records: Vec<ExperimentRecord> = reports
        .iter()
        .map(|r| {
            ExperimentRecord::new("fig-witness", r.n, r.trial, r.seed.expect("experiment reports carry seeds"))
                .metric("delta", r.delta)
                .metric("r", r.r as f64)
                .metric("alpha_min", r.alpha_min)
                .metric("value", r.value)
                .metric("top_mean", r.top_mean)
                .metric("ones_term", r.ones_term)
                .metric("p_max_neg", r.p_max_neg)
        })
        .collect();

    let per_n = |key: &str| -> Vec<Point> {
        cfg.n_list
            .iter()
            .map(|&n| {
                let v: Vec<f64> = records.iter().filter(|r| r.n == n).filter_map(|r| r.get(key)).collect();
                let (m, s) = mean_std(&v);
                Point::with_err(n as f64, m, s)
            })
            .collect()
    };
    let medians = |key: &str| -> Vec<Point> {
        cfg.n_list
            .iter()
            .map(|&n| {
                let v: Vec<f64> = records.iter().filter(|r| r.n == n).filter_map(|r| r.get(key)).collect();
                Point::new(n as f64, median(&v))
            })
            .collect()
    };
    let sqrt2: Vec<Point> = cfg.n_list.iter().map(|&n| Point::new(n as f64, std::f64::consts::SQRT_2)).collect();
    let fig = Figure {
        name: "fig_witness".into(),
        panels: vec![
            Panel {
                title: format!("Witness lower bound, delta = {}", cfg.delta),
                x_label: "n".into(),
                y_label: "<X, W>".into(),
                log_x: true,
                series: vec![
                    Series::new("mean +- sd", SeriesKind::Points, per_n("value")),
                    Series::new("median", SeriesKind::Line, medians("value")),
                    Series::new("sqrt 2", SeriesKind::Line, sqrt2),
                ],
                ..Panel::default()
            },
            Panel {
                title: "Smallest feasible alpha".into(),
                x_label: "n".into(),
                y_label: "alpha_min".into(),
                log_x: true,
                log_y: true,
                series: vec![
                    Series::new("mean +- sd", SeriesKind::Points, per_n("alpha_min")),
                    Series::new("median", SeriesKind::Line, medians("alpha_min")),
                ],
            },
        ],
    };
    Ok(RunOutput { config: cfg.clone(), records, figures: vec![fig] })
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Certificate that is above the threshold exactly when `ẑᵀWẑ` is, and
/// never below `ẑᵀWẑ`; stands in for a hypothetical sub-2 certifier.
pub fn oracle_certificate(w: &SymMatrix, zhat: &[f64], eps: f64) -> Result<f64> {
    let q = spectral::quadratic_form(w, zhat)?;
    let t = 2.0 - eps;
    let sign = if q > t { 1.0 } else if q < t { -1.0 } else { 0.0 };
    Ok((t + 0.01 * sign).max(q))
}

/// Attempts per requested trial before giving up on drawing
/// non-degenerate planted samples.
const MAX_ATTEMPTS_PER_TRIAL: usize = 10;

fn reduction_seed(master: u64, n: usize, gamma_idx: usize, null: bool, attempt: usize) -> SeedSpec {
    let branch = if null { 1usize << 31 } else { 0 };
    SeedSpec::grid(master, n, branch | (gamma_idx << 24) | attempt)
}

fn planted_record(cfg: &RunConfig, n: usize, gi: usize, gamma: f64, attempt: usize) -> Result<ExperimentRecord> {
    let big_n = (n as f64 / gamma).round() as usize;
    let seed = reduction_seed(cfg.master_seed, n, gi, false, attempt);
    let sample = sample_spiked_wishart(n, big_n, cfg.beta, cfg.rho, true, seed)?;
    let mut rec = ExperimentRecord::new(format!("reduction-planted-g{gamma}"), n, attempt, seed)
        .metric("N", big_n as f64)
        .metric("gamma", gamma)
        .metric("beta", cfg.beta)
        .metric("rho", cfg.rho)
        .metric("hard_regime", if cfg.beta * cfg.beta < gamma { 1.0 } else { 0.0 });
    if sample.degenerate {
        rec.flag("degenerate");
        return Ok(rec.label("verdict", "P").label("verdict_oracle", "P"));
    }
    let inst = embed_wishart(&sample, seed)?;
    let d = reduction_diagnostics(&sample, &inst)?;
    let zhat = make_zhat(sample.spike.as_ref().expect("planted"), cfg.rho)?;
    let baseline = verdict(spectral::lambda_max(&inst.w)?, cfg.eps);
    let oracle = verdict(oracle_certificate(&inst.w, &zhat, cfg.eps)?, cfg.eps);
    let chain_z = d.z_w_z - d.bound_rhs;
    let chain_s = d.zhat_sample_energy / d.mu - d.s;
    if chain_z < -1e-8 || chain_s < -1e-8 {
        rec.flag("chain_violation");
    }
    Ok(rec
        .metric("span_dim", inst.span_dim as f64)
        .metric("zu_overlap", d.zu_overlap)
        .metric("energy", d.zhat_sample_energy)
        .metric("mu", d.mu)
        .metric("s", d.s)
        .metric("zWz", d.z_w_z)
        .metric("lambda_1", d.lambda_1)
        .metric("lambda_N1", d.lambda_n1)
        .metric("bound_rhs", d.bound_rhs)
        .metric("lambda_max", baseline.certificate_value)
        .metric("oracle_certificate", oracle.certificate_value)
        .label("verdict", label_str(baseline.label))
        .label("verdict_oracle", label_str(oracle.label)))
}

fn null_record(cfg: &RunConfig, n: usize, gi: usize, gamma: f64, trial: usize) -> Result<ExperimentRecord> {
    let big_n = (n as f64 / gamma).round() as usize;
    let seed = reduction_seed(cfg.master_seed, n, gi, true, trial);
    let sample = sample_spiked_wishart(n, big_n, cfg.beta, cfg.rho, false, seed)?;
    let inst = embed_wishart(&sample, seed)?;
    let baseline = verdict(spectral::lambda_max(&inst.w)?, cfg.eps);
    Ok(ExperimentRecord::new(format!("reduction-null-g{gamma}"), n, trial, seed)
        .metric("N", big_n as f64)
        .metric("gamma", gamma)
        .metric("beta", cfg.beta)
        .metric("rho", cfg.rho)
        .metric("lambda_max", baseline.certificate_value)
        .label("verdict", label_str(baseline.label)))
}

fn label_str(l: Label) -> &'static str {
    match l {
        Label::P => "P",
        Label::Q => "Q",
    }
}

/// Planted records for one `gamma`: attempts continue until `trials`
/// non-degenerate samples are found. Degenerate attempts are kept, flagged.
pub fn planted_records(cfg: &RunConfig, n: usize, gi: usize, gamma: f64) -> Result<Vec<ExperimentRecord>> {
    let mut out = Vec::new();
    let mut good = 0;
    let mut next = 0;
    while good < cfg.trials && next < MAX_ATTEMPTS_PER_TRIAL * cfg.trials {
        let batch: Vec<usize> = (next..next + cfg.trials - good).collect();
        next += batch.len();
        let recs: Vec<ExperimentRecord> =
            batch.into_par_iter().map(|a| planted_record(cfg, n, gi, gamma, a)).collect::<Result<_>>()?;
        good += recs.iter().filter(|r| !r.flags.iter().any(|f| f == "degenerate")).count();
        out.extend(recs);
    }
    Ok(out)
}

pub fn run_reduction_demo(cfg: &RunConfig) -> Result<RunOutput> {
    let n = cfg.n();
    let mut records = Vec::new();
    for (gi, &gamma) in cfg.gamma_list.iter().enumerate() {
        records.extend(planted_records(cfg, n, gi, gamma)?);
        let nulls: Vec<ExperimentRecord> =
            (0..cfg.trials).into_par_iter().map(|t| null_record(cfg, n, gi, gamma, t)).collect::<Result<_>>()?;
        records.extend(nulls);
    }

    let planted_metric = |gamma: f64, key: &str| -> Vec<f64> {
        records
            .iter()
            .filter(|r| r.experiment == format!("reduction-planted-g{gamma}") && !r.is_flagged())
            .filter_map(|r| r.get(key))
            .collect()
    };
    let sweep = |key: &str| -> Vec<Point> {
        cfg.gamma_list.iter().map(|&g| Point::new(g, median(&planted_metric(g, key)))).collect()
    };
    let threshold: Vec<Point> = cfg.gamma_list.iter().map(|&g| Point::new(g, 2.0 - cfg.eps)).collect();
    let fig = Figure {
        name: "reduction_sweep".into(),
        panels: vec![
            Panel {
                title: format!("Planted median zWz, n = {n}, beta = {}, rho = {}", cfg.beta, cfg.rho),
                x_label: "gamma = n / N".into(),
                y_label: "zWz".into(),
                series: vec![
                    Series::new("median zWz", SeriesKind::Line, sweep("zWz")),
                    Series::new("median bound", SeriesKind::Line, sweep("bound_rhs")),
                    Series::new("2 - eps", SeriesKind::Line, threshold),
                ],
                ..Panel::default()
            },
            Panel {
                title: "Median span mass s".into(),
                x_label: "gamma = n / N".into(),
                y_label: "s".into(),
                series: vec![Series::new("median s", SeriesKind::Points, sweep("s"))],
                ..Panel::default()
            },
        ],
    };
    Ok(RunOutput { config: cfg.clone(), records, figures: vec![fig] })
}
