use std::fs;
use std::path::Path;
use std::process::Command;

use nnpca_cli::output::{read_matrix, read_results};
use nnpca_cli::record::sort_records;
use nnpca_cli::{emit_outputs, run, Experiment, RunConfig};

fn small(experiment: Experiment) -> RunConfig {
    let mut cfg = RunConfig::defaults(experiment);
    cfg.trials = 2;
    cfg.master_seed = 77;
    match experiment {
        Experiment::FigPrimal | Experiment::FigDual => cfg.n_list = vec![20],
        Experiment::FigWitness => cfg.n_list = vec![100, 200],
        Experiment::ReductionDemo => {
            cfg.n_list = vec![80];
            cfg.gamma_list = vec![1.5, 1.2];
            cfg.rho = 0.1;
        }
    }
    cfg
}

const ALL: [Experiment; 4] =
    [Experiment::FigPrimal, Experiment::FigDual, Experiment::FigWitness, Experiment::ReductionDemo];

#[test]
fn reruns_give_identical_csv_bytes() {
    for exp in ALL {
        let cfg = small(exp);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        emit_outputs(&run(&cfg).unwrap(), a.path()).unwrap();
        emit_outputs(&run(&cfg).unwrap(), b.path()).unwrap();
        let ca = fs::read(a.path().join("results.csv")).unwrap();
        let cb = fs::read(b.path().join("results.csv")).unwrap();
        assert_eq!(ca, cb, "{}", exp.id());
    }
}

#[test]
fn json_round_trips_and_figures_have_sidecars() {
    for exp in ALL {
        let cfg = small(exp);
        let out = run(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let written = emit_outputs(&out, dir.path()).unwrap();
        let file = read_results(&dir.path().join("results.json")).unwrap();
        let mut records = out.records.clone();
        sort_records(&mut records);
        assert_eq!(file.records, records);
        assert_eq!(file.config, cfg);
        assert_eq!(file.schema_version, nnpca_cli::record::SCHEMA_VERSION);
        for fig in &out.figures {
            assert!(written.contains(&dir.path().join(format!("{}.svg", fig.name))));
            let sidecar = fs::read_to_string(dir.path().join(format!("{}.csv", fig.name))).unwrap();
            let plotted: usize = fig.panels.iter().flat_map(|p| &p.series).map(|s| s.points.len()).sum();
            assert_eq!(sidecar.lines().count(), plotted + 1);
        }

        let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        assert_eq!(header, nnpca_cli::output::csv_columns(exp));
        assert_eq!(csv.lines().count(), records.len() + 1);
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').count(), header.len());
        }
    }
}

#[test]
fn flagged_trials_are_counted_not_dropped() {
    let mut cfg = small(Experiment::FigPrimal);
    cfg.max_iters = 5;
    let out = run(&cfg).unwrap();
    assert_eq!(out.records.len(), cfg.trials);
    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&out, dir.path()).unwrap();
    let file = read_results(&dir.path().join("results.json")).unwrap();
    assert_eq!(file.failures.get("max_iters"), Some(&cfg.trials));
}

fn cli(args: &[&str], out: &Path) -> String {
    let o = Command::new(env!("CARGO_BIN_EXE_nnpca"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn command_line_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cli(&["gen", "--n", "12", "--seed", "5"], d);
    let w = read_matrix(&d.join("matrix.txt")).unwrap();
    assert_eq!(w.n(), 12);

    let stdout = cli(&["sdp-solve", d.join("matrix.txt").to_str().unwrap()], d);
    assert!(stdout.contains("\"status\": \"converged\""), "{stdout}");
    assert_eq!(read_matrix(&d.join("x_opt.txt")).unwrap().n(), 12);
    assert_eq!(read_matrix(&d.join("y_dual.txt")).unwrap().n(), 12);

    let cfg_path = d.join("run.cfg");
    fs::write(&cfg_path, "# small witness sweep\nn = 60, 120\ntrials = 2\ndelta = 0.05\n").unwrap();
    let wdir = d.join("witness");
    let stdout = cli(&["fig-witness", "--config", cfg_path.to_str().unwrap(), "--trials", "3"], &wdir);
    assert!(stdout.contains("fig-witness: 6 records"), "{stdout}");
    let file = read_results(&wdir.join("results.json")).unwrap();
    assert_eq!(file.config.delta, 0.05);
    assert!(wdir.join("fig_witness.svg").exists());

    let bad = Command::new(env!("CARGO_BIN_EXE_nnpca")).args(["fig-witness", "--delta", "1.5"]).output().unwrap();
    assert!(!bad.status.success());
}
