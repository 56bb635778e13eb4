//! Run configuration and its `key = value` file format.
//!
//! Config files hold one `key = value` pair per line; `#` starts a comment
//! and lists are comma-separated. Keys are the [`RunConfig`] field names.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    FigPrimal,
    FigDual,
    FigWitness,
    ReductionDemo,
}

impl Experiment {
    pub fn id(self) -> &'static str {
        match self {
            Experiment::FigPrimal => "fig-primal",
            Experiment::FigDual => "fig-dual",
            Experiment::FigWitness => "fig-witness",
            Experiment::ReductionDemo => "reduction-demo",
        }
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        [Experiment::FigPrimal, Experiment::FigDual, Experiment::FigWitness, Experiment::ReductionDemo]
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| ConfigError::new(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl ConfigError {
    fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Sizes; single-size experiments use the first entry.
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub delta: f64,
    pub beta: f64,
    /// Aspect ratios `n / N` swept by the reduction demo.
    pub gamma_list: Vec<f64>,
    pub rho: f64,
    pub eps: f64,
    /// ADMM primal and dual tolerance.
    pub tol: f64,
    pub max_iters: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// Default scales for each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = RunConfig {
            experiment,
            n_list: vec![150],
            trials: 50,
            delta: 0.04,
            beta: -0.99,
            gamma_list: vec![1.5, 1.2, 1.05],
            rho: 0.01,
            eps: 0.1,
            tol: 1e-6,
            max_iters: 50_000,
            master_seed: 20190101,
            out_dir: PathBuf::from("out"),
        };
        match experiment {
            Experiment::FigPrimal | Experiment::FigDual => base,
            Experiment::FigWitness => RunConfig { n_list: vec![500, 1000, 2000, 4000, 8192], trials: 10, ..base },
            Experiment::ReductionDemo => RunConfig { n_list: vec![2000], trials: 10, ..base },
        }
    }

    pub fn n(&self) -> usize {
        self.n_list[0]
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |e: &dyn fmt::Display| ConfigError::new(format!("invalid value `{value}` for `{key}`: {e}"));
        match key {
            "experiment" => self.experiment = value.parse()?,
            "n" | "n_list" => self.n_list = parse_list(value).map_err(|e| bad(&e))?,
            "trials" => self.trials = value.parse().map_err(|e| bad(&e))?,
            "delta" => self.delta = value.parse().map_err(|e| bad(&e))?,
            "beta" => self.beta = value.parse().map_err(|e| bad(&e))?,
            "gamma" | "gamma_list" => self.gamma_list = parse_list(value).map_err(|e| bad(&e))?,
            "rho" => self.rho = value.parse().map_err(|e| bad(&e))?,
            "eps" => self.eps = value.parse().map_err(|e| bad(&e))?,
            "tol" => self.tol = value.parse().map_err(|e| bad(&e))?,
            "max_iters" => self.max_iters = value.parse().map_err(|e| bad(&e))?,
            "master_seed" | "seed" => self.master_seed = value.parse().map_err(|e| bad(&e))?,
            "out_dir" | "out" => self.out_dir = PathBuf::from(value),
            _ => return Err(ConfigError::new(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every setting of a config file's text.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| ConfigError::new(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(ConfigError::new("n must be a nonempty list of positive sizes"));
        }
        if self.trials == 0 {
            return Err(ConfigError::new("trials must be positive"));
        }
        match self.experiment {
            Experiment::FigPrimal | Experiment::FigDual if self.n() < 10 => {
                return Err(ConfigError::new("SDP figures need n >= 10"));
            }
            Experiment::FigWitness => {
                let min_n = *self.n_list.iter().min().expect("nonempty");
                if !(self.delta > 0.0 && self.delta < 1.0) || self.delta * (min_n as f64) < 1.0 {
                    return Err(ConfigError::new("witness needs delta in (0, 1) and delta * min(n) >= 1"));
                }
            }
            Experiment::ReductionDemo => {
                if self.gamma_list.is_empty() || self.gamma_list.iter().any(|&g| !(g > 1.0)) {
                    return Err(ConfigError::new("gamma values must exceed 1 so that N < n"));
                }
                if !(self.beta > -1.0) || !(self.rho > 0.0 && self.rho < 1.0) || !(self.eps > 0.0) {
                    return Err(ConfigError::new("need beta > -1, rho in (0, 1) and eps > 0"));
                }
            }
            _ => {}
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(ConfigError::new("tol and max_iters must be positive"));
        }
        Ok(())
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, T::Err> {
    s.split(',').map(|p| p.trim().parse()).collect()
}
