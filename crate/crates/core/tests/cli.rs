use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bohb::cli::{
    cmd_report, cmd_run, seed_file_name, trajectory_files, Grid, Manifest, RunConfig,
    MANIFEST_FILE, MISSING,
};
use bohb::configspace::ConfigId;
use bohb::sampler::Provenance;
use bohb::scheduler::{Axis, EventKind, OptimizerKind, Record, Trajectory};
use tempfile::TempDir;

fn bohb_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bohb"))
        .args(args)
        .env_remove("BOHB_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn quick_config(dir: &Path, optimizer: OptimizerKind, seeds: std::ops::Range<u64>) -> RunConfig {
    RunConfig {
        optimizer,
        n_categorical: 2,
        n_continuous: 2,
        n_iterations: 3,
        seeds: seeds.collect(),
        output_dir: dir.to_path_buf(),
        ..Default::default()
    }
}

fn read_all(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    trajectory_files(dir)
        .unwrap()
        .into_iter()
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p.file_name().unwrap().into(), bytes)
        })
        .collect()
}

#[test]
fn run_writes_one_file_per_seed_and_a_manifest() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("bohb");
    let summary = cmd_run(&quick_config(&dir, OptimizerKind::Bohb, 0..32)).unwrap();
    assert_eq!(summary.written.len(), 32);
    assert!(summary.skipped.is_empty());
    assert_eq!(trajectory_files(&dir).unwrap().len(), 32);
    let manifest = Manifest::read(&dir).unwrap();
    assert_eq!(manifest.version, env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest.config.seeds.len(), 32);
    assert_eq!(manifest.config.max_budget, Some(729.0));
    assert_eq!(manifest.benchmark_id, "counting-ones(2+2)");
    // No temporary files are left behind.
    let names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.len(), 33, "{names:?}");
}

#[test]
fn same_seeds_give_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    cmd_run(&quick_config(&a, OptimizerKind::Bohb, 0..4)).unwrap();
    cmd_run(&quick_config(&b, OptimizerKind::Bohb, 0..4)).unwrap();
    assert_eq!(read_all(&a), read_all(&b));
}

#[test]
fn interrupted_batch_resumes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("runs");
    let config = quick_config(&dir, OptimizerKind::Hyperband, 0..5);
    cmd_run(&config).unwrap();
    let before = read_all(&dir);
    fs::remove_file(dir.join(seed_file_name(3))).unwrap();

    let summary = cmd_run(&config).unwrap();
    assert_eq!(summary.written, vec![dir.join(seed_file_name(3))]);
    assert_eq!(summary.skipped.len(), 4);
    assert_eq!(read_all(&dir), before);

    let changed = RunConfig { eta: 2.0, ..config };
    assert!(cmd_run(&changed).unwrap_err().is_validation());
}

#[test]
fn binary_rejects_unknown_benchmark_with_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = bohb_bin(&[
        "run",
        "--benchmark",
        "branin",
        "--output-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("counting-ones") && err.contains("mf-sphere"),
        "{err}"
    );
    assert!(!tmp.path().join(MANIFEST_FILE).exists());
}

#[test]
fn binary_schedule_table_and_errors() {
    let out = bohb_bin(&[
        "schedule",
        "--min-budget",
        "9",
        "--max-budget",
        "729",
        "--eta",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let n: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    assert_eq!(n, ["81", "34", "15", "8", "5"]);

    let out = bohb_bin(&["schedule", "--min-budget", "1", "--max-budget", "1"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);

    let out = bohb_bin(&[
        "schedule",
        "--min-budget",
        "1",
        "--max-budget",
        "81",
        "--json",
    ]);
    let brackets: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let b0: Vec<f64> = brackets
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["initial_budget"].as_f64().unwrap())
        .collect();
    assert_eq!(b0, [1.0, 3.0, 9.0, 27.0, 81.0]);

    let out = bohb_bin(&["schedule", "--min-budget", "100", "--max-budget", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn binary_output_dir_from_environment_and_config_file_overrides() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("from-env");
    let config = tmp.path().join("run.toml");
    fs::write(
        &config,
        "seeds = [7, 8]\nn_iterations = 2\n[sampler]\nrho = 0.5\n",
    )
    .unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_bohb"))
        .args([
            "run",
            "--seeds",
            "0..5",
            "--n-categorical",
            "1",
            "--n-continuous",
            "1",
        ])
        .arg("--config")
        .arg(&config)
        .env("BOHB_OUTPUT_DIR", &out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let names: Vec<_> = trajectory_files(&out_dir)
        .unwrap()
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, [seed_file_name(7), seed_file_name(8)]);
    let manifest = Manifest::read(&out_dir).unwrap();
    assert_eq!(manifest.config.sampler.rho, 0.5);
    assert_eq!(manifest.config.n_categorical, 1);
}

#[test]
fn binary_reports_invalid_field_name() {
    let tmp = TempDir::new().unwrap();
    let out = bohb_bin(&[
        "run",
        "--n-workers",
        "0",
        "--output-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_workers"));
}

/// Writes a run directory holding hand-made incumbent trajectories; each
/// inner vector is one run as `(cum_budget, regret)` incumbent events.
fn fake_dir(
    root: &Path,
    name: &str,
    optimizer: OptimizerKind,
    n_cont: usize,
    runs: &[Vec<(f64, f64)>],
) -> PathBuf {
    let dir = root.join(name);
    fs::create_dir_all(&dir).unwrap();
    let config = RunConfig {
        optimizer,
        n_continuous: n_cont,
        seeds: (0..runs.len() as u64).collect(),
        output_dir: dir.clone(),
        ..Default::default()
    };
    let manifest = Manifest {
        version: "test".into(),
        benchmark_id: config.benchmark_id(),
        config,
    };
    fs::write(
        dir.join(MANIFEST_FILE),
        serde_json::to_string(&manifest).unwrap(),
    )
    .unwrap();
    for (seed, events) in runs.iter().enumerate() {
        let mut t = Trajectory::new();
        for &(at, regret) in events {
            for event in [EventKind::EvalEnd, EventKind::Incumbent] {
                t.push(Record {
                    event,
                    sim_time: at,
                    cum_budget: at,
                    sh_run: 0,
                    stage: 0,
                    budget: 9.0,
                    config_id: ConfigId(0),
                    loss: -regret,
                    provenance: Provenance::Random,
                    regret: Some(regret),
                });
            }
        }
        t.write(dir.join(seed_file_name(seed as u64))).unwrap();
    }
    dir
}

#[test]
fn report_statistics_and_missing_marker() {
    let tmp = TempDir::new().unwrap();
    let single = fake_dir(
        tmp.path(),
        "single",
        OptimizerKind::Hyperband,
        4,
        &[vec![(10.0, 0.9), (20.0, 0.5)]],
    );
    let pair = fake_dir(
        tmp.path(),
        "pair",
        OptimizerKind::Bohb,
        4,
        &[vec![(10.0, 0.2)], vec![(12.0, 0.8), (15.0, 0.4)]],
    );
    let grid = Grid::List(vec![5.0, 11.0, 15.0, 100.0]);
    let report = cmd_report(&[single, pair], &grid, Axis::Budget).unwrap();
    let csv = report.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "budget,bohb_mean,bohb_sem,bohb_runs,hyperband_mean,hyperband_sem,hyperband_runs"
    );
    // Before any incumbent: missing for both.
    assert_eq!(
        lines[1],
        format!("5,{MISSING},{MISSING},2,{MISSING},{MISSING},1")
    );
    // The second bohb run has no incumbent yet at 11.
    assert_eq!(lines[2], format!("11,{MISSING},{MISSING},2,0.9,0,1"));
    // Two runs at 0.2 and 0.4: mean 0.3, SEM 0.1.
    let cells: Vec<f64> = lines[3].split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cells[1] - 0.3).abs() < 1e-12 && (cells[2] - 0.1).abs() < 1e-12);
    // After the final event a single run reports its final regret with SEM 0.
    assert!(lines[4].ends_with(",0.5,0,1"), "{}", lines[4]);
}

#[test]
fn report_rejects_mixed_benchmarks() {
    let tmp = TempDir::new().unwrap();
    let a = fake_dir(tmp.path(), "a", OptimizerKind::Bohb, 4, &[vec![(1.0, 1.0)]]);
    let b = fake_dir(
        tmp.path(),
        "b",
        OptimizerKind::Hyperband,
        5,
        &[vec![(1.0, 1.0)]],
    );
    let err = cmd_report(
        &[a.clone(), b.clone()],
        &Grid::List(vec![1.0]),
        Axis::Budget,
    )
    .unwrap_err();
    assert!(err.is_validation());
    let out = bohb_bin(&[
        "report",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--grid",
        "1,2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_matches_step_interpolation_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let bohb = tmp.path().join("bohb");
    let hb = tmp.path().join("hb");
    cmd_run(&quick_config(&bohb, OptimizerKind::Bohb, 0..3)).unwrap();
    cmd_run(&quick_config(&hb, OptimizerKind::Hyperband, 0..3)).unwrap();
    let grid: Grid = "log:9:12000:25".parse().unwrap();
    let report = cmd_report(&[bohb.clone(), hb.clone()], &grid, Axis::Budget).unwrap();

    let runs: Vec<Trajectory> = trajectory_files(&bohb)
        .unwrap()
        .iter()
        .map(|p| Trajectory::read(p).unwrap())
        .collect();
    let column = &report.columns[0];
    assert_eq!(column.optimizer, OptimizerKind::Bohb);
    for (i, &t) in report.grid.iter().enumerate() {
        // Latest incumbent at or before t, found by a plain scan.
        let regrets: Option<Vec<f64>> = runs
            .iter()
            .map(|r| {
                let mut last = None;
                for rec in r.records() {
                    if rec.event == EventKind::Incumbent && rec.cum_budget <= t {
                        last = rec.regret;
                    }
                }
                last
            })
            .collect();
        let expected = regrets.map(|v| v.iter().sum::<f64>() / v.len() as f64);
        match (column.mean[i], expected) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
            (a, b) => assert_eq!(a, b),
        }
    }

    let args = [
        "report",
        bohb.to_str().unwrap(),
        hb.to_str().unwrap(),
        "--grid",
        "log:9:12000:25",
    ];
    let first = bohb_bin(&args);
    let second = bohb_bin(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(String::from_utf8(first.stdout).unwrap(), report.to_csv());
}
