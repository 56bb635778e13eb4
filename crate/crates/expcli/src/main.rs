use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nnpca::ensembles::{sample_goe, sample_spiked_wigner, PriorKind};
use nnpca::sdp::{check_feasibility, solve_primal, SdpConfig};
use nnpca::{spectral, SeedSpec};
use nnpca_cli::output::{read_matrix, write_matrix};
use nnpca_cli::record::failure_counts;
use nnpca_cli::{emit_outputs, run, Experiment, RunConfig};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "nnpca", version, about = "Non-negative PCA relaxation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` config file, applied before the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Size, or comma-separated sizes for fig-witness.
    #[arg(long, global = true, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Aspect ratio n/N, or a comma-separated sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    #[arg(long, global = true)]
    rho: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// ADMM residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Worker threads for independent trials.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Second eigenvalue and value of the SDP solution on GOE instances.
    FigPrimal,
    /// Spectra of W and W + Y with the recovered dual certificate Y.
    FigDual,
    /// Explicit witness lower bound and smallest feasible alpha versus n.
    FigWitness,
    /// Wishart embedding diagnostics and verdicts over a gamma sweep.
    ReductionDemo,
    /// Solves the SDP for one matrix file.
    SdpSolve {
        /// Matrix file: a line with n, then n rows of n numbers.
        input: PathBuf,
        /// Residual balancing of the ADMM penalty.
        #[arg(long)]
        adaptive: bool,
    },
    /// Writes a sampled matrix in the matrix file format.
    Gen {
        #[arg(long, value_enum, default_value_t = Ensemble::Goe)]
        ensemble: Ensemble,
        /// Defaults to `<out>/matrix.txt`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Ensemble {
    Goe,
    SpikedSphere,
    SpikedOrthant,
}

impl Cli {
    fn run_config(&self, experiment: Experiment) -> Result<RunConfig> {
        let mut cfg = RunConfig::defaults(experiment);
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = &self.n {
            cfg.n_list = v.clone();
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = &self.gamma {
            cfg.gamma_list = v.clone();
        }
        if let Some(v) = self.rho {
            cfg.rho = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.max_iters {
            cfg.max_iters = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run_experiment(cli: &Cli, experiment: Experiment) -> Result<()> {
    let cfg = cli.run_config(experiment)?;
    let out = run(&cfg)?;
    let paths = emit_outputs(&out, &cfg.out_dir)?;
    println!("{}: {} records", experiment.id(), out.records.len());
    for (flag, count) in failure_counts(&out.records) {
        println!("  flagged {flag}: {count}");
    }
    for p in paths {
        println!("  wrote {}", p.display());
    }
    Ok(())
}

fn sdp_solve(cli: &Cli, input: &Path, adaptive: bool) -> Result<()> {
    let cfg = cli.run_config(Experiment::FigPrimal)?;
    let w = read_matrix(input)?;
    let solver = SdpConfig {
        primal_tol: cfg.tol,
        dual_tol: cfg.tol,
        max_iters: cfg.max_iters,
        adaptive_rho: adaptive,
        ..SdpConfig::default()
    };
    let sol = solve_primal(&w, &solver)?;
    let feas = check_feasibility(&sol.x_opt, 1e-8);
    let x_eigs = spectral::eigenvalues(&sol.x_opt)?;
    let n = w.n();
    let summary = json!({
        "n": n,
        "status": sol.status,
        "iters": sol.iters,
        "value": sol.value,
        "dual_value": sol.dual_value,
        "duality_gap": sol.duality_gap(),
        "dual_usable": sol.dual_usable,
        "lambda_max": spectral::lambda_max(&w)?,
        "second_eig": if n > 1 { x_eigs[n - 2] } else { 0.0 },
        "feasibility": feas,
    });
    std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let path = cfg.out_dir.join("solution.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    write_matrix(&cfg.out_dir.join("x_opt.txt"), &sol.x_opt)?;
    write_matrix(&cfg.out_dir.join("y_dual.txt"), &sol.y_dual)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn gen(cli: &Cli, ensemble: Ensemble, output: &Option<PathBuf>) -> Result<()> {
    let cfg = cli.run_config(Experiment::FigPrimal)?;
    let n = cfg.n();
    let seed = SeedSpec::new(cfg.master_seed, 0);
    let w = match ensemble {
        Ensemble::Goe => sample_goe(n, seed)?,
        Ensemble::SpikedSphere => sample_spiked_wigner(n, cli.beta.unwrap_or(2.0), PriorKind::Sphere, seed)?.matrix,
        Ensemble::SpikedOrthant => {
            sample_spiked_wigner(n, cli.beta.unwrap_or(2.0), PriorKind::PositiveOrthant, seed)?.matrix
        }
    };
    let path = match output {
        Some(p) => p.clone(),
        None => {
            std::fs::create_dir_all(&cfg.out_dir)?;
            cfg.out_dir.join("matrix.txt")
        }
    };
    write_matrix(&path, &w)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    // sequential dense kernels keep every trial bit-reproducible
    faer::set_global_parallelism(faer::Par::Seq);
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match &cli.command {
        Command::FigPrimal => run_experiment(&cli, Experiment::FigPrimal),
        Command::FigDual => run_experiment(&cli, Experiment::FigDual),
        Command::FigWitness => run_experiment(&cli, Experiment::FigWitness),
        Command::ReductionDemo => run_experiment(&cli, Experiment::ReductionDemo),
        Command::SdpSolve { input, adaptive } => sdp_solve(&cli, input, *adaptive),
        Command::Gen { ensemble, output } => gen(&cli, *ensemble, output),
    }
}
