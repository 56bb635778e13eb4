use std::collections::BTreeMap;

use nnpca::SeedSpec;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// One trial of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub n: usize,
    pub trial: usize,
    pub seed: SeedSpec,
    pub metrics: BTreeMap<String, f64>,
    /// Categorical outputs such as verdict labels.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, String>,
    /// Failure flags; a flagged trial is kept but excluded from figures.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl ExperimentRecord {
    pub fn new(experiment: impl Into<String>, n: usize, trial: usize, seed: SeedSpec) -> Self {
        Self {
            experiment: experiment.into(),
            n,
            trial,
            seed,
            metrics: BTreeMap::new(),
            labels: BTreeMap::new(),
            flags: Vec::new(),
        }
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn label(mut self, key: &str, value: impl Into<String>) -> Self {
        self.labels.insert(key.to_string(), value.into());
        self
    }

    pub fn flag(&mut self, flag: &str) {
        if !self.flags.iter().any(|f| f == flag) {
            self.flags.push(flag.to_string());
        }
    }

    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    /// Metrics that are not finite; they violate the record contract.
    pub fn non_finite_metrics(&self) -> Vec<&str> {
        self.metrics.iter().filter(|(_, v)| !v.is_finite()).map(|(k, _)| k.as_str()).collect()
    }

    pub fn seed_string(&self) -> String {
        format!("{}:{}", self.seed.master_seed, self.seed.trial_index)
    }
}

/// Sorts by `(experiment, n, trial)`.
pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| (&a.experiment, a.n, a.trial).cmp(&(&b.experiment, b.n, b.trial)));
}

/// Count of each failure flag across `records`.
pub fn failure_counts(records: &[ExperimentRecord]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for f in records.iter().flat_map(|r| &r.flags) {
        *out.entry(f.clone()).or_insert(0) += 1;
    }
    out
}
