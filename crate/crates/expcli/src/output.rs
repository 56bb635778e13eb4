//! Result files: `results.csv`, `results.json`, figures and matrix text files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use faer::Mat;
use nnpca::SymMatrix;
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, RunConfig};
use crate::plot::{render_svg, sidecar_csv, Figure};
use crate::record::{failure_counts, sort_records, ExperimentRecord, SCHEMA_VERSION};

/// Asymmetry accepted when reading a matrix file.
pub const MATRIX_SYMMETRY_TOL: f64 = 1e-9;

/// Everything one experiment run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: RunConfig,
    pub records: Vec<ExperimentRecord>,
    pub figures: Vec<Figure>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultsFile {
    pub schema_version: u32,
    pub experiment: String,
    pub config: RunConfig,
    /// Number of trials carrying each failure flag.
    pub failures: BTreeMap<String, usize>,
    pub records: Vec<ExperimentRecord>,
}

/// CSV columns of each experiment. `experiment`, `n`, `trial`, `seed` and
/// `flags` come from the record itself, everything else from its metrics
/// or labels.
pub fn csv_columns(experiment: Experiment) -> &'static [&'static str] {
    match experiment {
        Experiment::FigPrimal => &[
            "experiment", "n", "trial", "seed", "sdp_value", "second_eig", "numerical_rank", "iters", "converged",
            "flags",
        ],
        Experiment::FigDual => &[
            "experiment", "n", "trial", "seed", "sdp_value", "dual_value", "lambda_max_w", "duality_gap",
            "wall_fraction_w", "wall_fraction_wy", "dual_usable", "flags",
        ],
        Experiment::FigWitness => &[
            "experiment", "n", "delta", "trial", "seed", "alpha_min", "value", "top_mean", "ones_term", "p_max_neg",
            "flags",
        ],
        Experiment::ReductionDemo => &[
            "experiment", "n", "N", "gamma", "beta", "rho", "trial", "seed", "zu_overlap", "energy", "mu", "s", "zWz",
            "lambda_1", "lambda_N1", "bound_rhs", "verdict", "flags",
        ],
    }
}

fn cell(r: &ExperimentRecord, col: &str) -> String {
    match col {
        "experiment" => r.experiment.clone(),
        "n" => r.n.to_string(),
        "trial" => r.trial.to_string(),
        "seed" => r.seed_string(),
        "flags" => r.flags.join(";"),
        _ => {
            if let Some(v) = r.metrics.get(col) {
                format!("{v:?}")
            } else {
                r.labels.get(col).cloned().unwrap_or_default()
            }
        }
    }
}

/// CSV text for `records` in the given order.
pub fn records_csv(experiment: Experiment, records: &[ExperimentRecord]) -> String {
    let cols = csv_columns(experiment);
    let mut out = cols.join(",");
    out.push('\n');
    for r in records {
        let row: Vec<String> = cols.iter().map(|c| cell(r, c)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Writes `results.csv`, `results.json` and, per figure, `<name>.svg` with
/// its `<name>.csv` sidecar. Records are sorted by `(experiment, n, trial)`
/// first; returns the written paths.
pub fn emit_outputs(run: &RunOutput, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut records = run.records.clone();
    sort_records(&mut records);
    for r in &records {
        let bad = r.non_finite_metrics();
        if !bad.is_empty() {
            bail!("record {} n={} trial={} has non-finite metrics {bad:?}", r.experiment, r.n, r.trial);
        }
    }
    let mut written = Vec::new();

    let csv_path = out_dir.join("results.csv");
    write(&csv_path, &records_csv(run.config.experiment, &records))?;
    written.push(csv_path);

    let file = ResultsFile {
        schema_version: SCHEMA_VERSION,
        experiment: run.config.experiment.id().to_string(),
        config: run.config.clone(),
        failures: failure_counts(&records),
        records,
    };
    let json_path = out_dir.join("results.json");
    write(&json_path, &(serde_json::to_string_pretty(&file)? + "\n"))?;
    written.push(json_path);

    for fig in &run.figures {
        let svg = out_dir.join(format!("{}.svg", fig.name));
        write(&svg, &render_svg(fig))?;
        let csv = out_dir.join(format!("{}.csv", fig.name));
        write(&csv, &sidecar_csv(fig))?;
        written.extend([svg, csv]);
    }
    Ok(written)
}

pub fn read_results(path: &Path) -> Result<ResultsFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Parses the matrix text format: a line holding `n`, then `n` lines of
/// `n` whitespace-separated numbers. Asymmetry up to
/// [`MATRIX_SYMMETRY_TOL`] (relative) is averaged away.
pub fn parse_matrix(text: &str) -> Result<SymMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().context("empty matrix file")?;
    let n: usize = header.parse().with_context(|| format!("bad size header `{header}`"))?;
    if n == 0 {
        bail!("matrix size must be positive");
    }
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let line = lines.next().with_context(|| format!("expected {n} rows, found {i}"))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().with_context(|| format!("row {}: bad number `{t}`", i + 1)))
            .collect::<Result<_>>()?;
        if vals.len() != n {
            bail!("row {} has {} entries, expected {n}", i + 1, vals.len());
        }
        for (j, v) in vals.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    if lines.next().is_some() {
        bail!("trailing data after {n} rows");
    }
    Ok(SymMatrix::from_mat_checked(m.as_ref(), MATRIX_SYMMETRY_TOL)?)
}

pub fn format_matrix(m: &SymMatrix) -> String {
    let n = m.n();
    let mut out = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:?}", m.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<SymMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_matrix(path: &Path, m: &SymMatrix) -> Result<()> {
    write(path, &format_matrix(m))
}
