//! Experiment runner for the relaxation lab: figure reproductions, the
//! reduction demo, and their CSV/JSON/SVG outputs.

pub mod config;
pub mod experiments;
pub mod output;
pub mod plot;
pub mod record;
pub mod stats;

pub use config::{Experiment, RunConfig};
pub use experiments::{run_fig_dual, run_fig_primal, run_fig_witness, run_reduction_demo};
pub use output::{emit_outputs, RunOutput};
pub use record::ExperimentRecord;

/// Runs the experiment selected by `cfg.experiment`.
pub fn run(cfg: &RunConfig) -> anyhow::Result<RunOutput> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::FigPrimal => run_fig_primal(cfg),
        Experiment::FigDual => run_fig_dual(cfg),
        Experiment::FigWitness => run_fig_witness(cfg),
        Experiment::ReductionDemo => run_reduction_demo(cfg),
    }
}
