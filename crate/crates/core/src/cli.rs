//! Library side of the `bohb` command line tool: seed batches, schedule
//! tables and regret reports. The binary only parses arguments and maps
//! errors to exit codes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::{hyperband_brackets, BracketSpec, HyperbandParams};
use crate::benchmarks::{Benchmark, CountingOnes, MfSphere};
use crate::configspace::ConfigurationSpace;
use crate::error::{Error, Result};
use crate::sampler::SamplerParams;
use crate::scheduler::{run, Axis, ClockMode, OptimizerKind, RunParams, Trajectory};

/// Benchmark names accepted by [`RunConfig::benchmark`].
pub const BENCHMARKS: [&str; 2] = ["counting-ones", "mf-sphere"];

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to run a batch of seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub optimizer: OptimizerKind,
    pub benchmark: String,
    /// Counting-ones only.
    pub n_categorical: usize,
    /// Counting-ones only.
    pub n_continuous: usize,
    /// mf-sphere only, ignored when `space_file` is set.
    pub dim: usize,
    /// mf-sphere only: TOML file with `[[parameter]]` tables.
    pub space_file: Option<PathBuf>,
    /// Defaults to the benchmark's own budget range.
    pub min_budget: Option<f64>,
    pub max_budget: Option<f64>,
    pub eta: f64,
    pub sampler: SamplerParams,
    pub n_workers: usize,
    pub clock: ClockMode,
    pub time_scale: f64,
    pub n_iterations: usize,
    pub max_total_budget: Option<f64>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Bohb,
            benchmark: "counting-ones".into(),
            n_categorical: 4,
            n_continuous: 4,
            dim: 4,
            space_file: None,
            min_budget: None,
            max_budget: None,
            eta: 3.0,
            sampler: SamplerParams::default(),
            n_workers: 1,
            clock: ClockMode::Simulated,
            time_scale: 0.0,
            n_iterations: 10,
            max_total_budget: None,
            seeds: vec![0],
            output_dir: PathBuf::from("runs"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            what: "run config".into(),
            reason: e.to_string(),
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Returns a copy with every key present in `text` (TOML) replacing the
    /// current value. Nested tables such as `[sampler]` merge key by key.
    pub fn with_overrides(&self, text: &str) -> Result<Self> {
        let parse_err = |e: &dyn std::fmt::Display| Error::Parse {
            what: "run config".into(),
            reason: e.to_string(),
        };
        let overrides: toml::Table = toml::from_str(text).map_err(|e| parse_err(&e))?;
        let mut base = toml::Table::try_from(self).map_err(|e| parse_err(&e))?;
        merge(&mut base, overrides);
        base.try_into().map_err(|e| parse_err(&e))
    }

    pub fn build_benchmark(&self) -> Result<Box<dyn Benchmark>> {
        let bench: Box<dyn Benchmark> = match self.benchmark.replace('_', "-").as_str() {
            "counting-ones" => {
                let b = CountingOnes::new(self.n_categorical, self.n_continuous)?;
                let (lo, hi) = b.budget_range();
                Box::new(
                    b.with_budgets(self.min_budget.unwrap_or(lo), self.max_budget.unwrap_or(hi)),
                )
            }
            "mf-sphere" => {
                let b = match &self.space_file {
                    Some(path) => MfSphere::with_space(ConfigurationSpace::from_path(path)?)?,
                    None => MfSphere::new(self.dim)?,
                };
                let (lo, hi) = b.budget_range();
                Box::new(
                    b.with_budgets(self.min_budget.unwrap_or(lo), self.max_budget.unwrap_or(hi)),
                )
            }
            other => {
                return Err(Error::invalid(
                    "benchmark",
                    format!(
                        "unknown benchmark `{other}` (valid: {})",
                        BENCHMARKS.join(", ")
                    ),
                ))
            }
        };
        Ok(bench)
    }

    /// Fills in budget defaults from the benchmark.
    pub fn resolved(&self) -> Result<Self> {
        let bench = self.build_benchmark()?;
        let (lo, hi) = bench.budget_range();
        let mut out = self.clone();
        out.benchmark = bench.name().to_string();
        out.min_budget = Some(lo);
        out.max_budget = Some(hi);
        Ok(out)
    }

    pub fn run_params(&self, seed: u64) -> Result<RunParams> {
        let (lo, hi) = match (self.min_budget, self.max_budget) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => self.build_benchmark()?.budget_range(),
        };
        Ok(RunParams {
            optimizer: self.optimizer,
            hyperband: HyperbandParams::new(lo, hi, self.eta)?,
            sampler: self.sampler,
            n_workers: self.n_workers,
            n_iterations: self.n_iterations,
            max_total_budget: self.max_total_budget,
            clock: self.clock,
            time_scale: self.time_scale,
            seed,
        })
    }

    /// Checks every field before any run starts.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::invalid("seeds", "at least one seed is required"));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("seeds", "seeds must be distinct"));
        }
        self.build_benchmark()?;
        self.run_params(self.seeds[0])?.validate()
    }

    /// Short description identifying the benchmark instance, used to refuse
    /// mixing incomparable runs in one report.
    pub fn benchmark_id(&self) -> String {
        match self.benchmark.as_str() {
            "counting-ones" => format!(
                "counting-ones({}+{})",
                self.n_categorical, self.n_continuous
            ),
            "mf-sphere" => match &self.space_file {
                Some(p) => format!("mf-sphere({})", p.display()),
                None => format!("mf-sphere({})", self.dim),
            },
            other => other.to_string(),
        }
    }
}

fn merge(base: &mut toml::Table, overrides: toml::Table) {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// Contents of `manifest.json` in a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub benchmark_id: String,
    pub config: RunConfig,
}

impl Manifest {
    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            what: path.display().to_string(),
            reason: e.to_string(),
        })
    }
}

pub fn seed_file_name(seed: u64) -> String {
    format!("seed-{seed:04}.jsonl")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
    /// Seed files that already existed and were left untouched.
    pub skipped: Vec<PathBuf>,
}

/// Runs every seed of `config`, writing one trajectory file per seed plus a
/// manifest into the output directory. Existing seed files are kept, so an
/// interrupted batch resumes where it stopped.
pub fn cmd_run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let config = config.resolved()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        benchmark_id: config.benchmark_id(),
        config: config.clone(),
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        let existing = Manifest::read(dir)?;
        if existing.config != manifest.config {
            return Err(Error::invalid(
                "output_dir",
                format!(
                    "{} holds runs made with a different configuration",
                    dir.display()
                ),
            ));
        }
    } else {
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        write_atomic(&manifest_path, &text)?;
    }

    let bench = config.build_benchmark()?;
    let results = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let path = dir.join(seed_file_name(seed));
            if path.exists() {
                return Ok((path, false));
            }
            let trajectory = run(bench.as_ref(), &config.run_params(seed)?)?;
            write_atomic(&path, &trajectory.to_jsonl())?;
            Ok((path, true))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = RunSummary::default();
    for (path, written) in results {
        if written {
            summary.written.push(path);
        } else {
            summary.skipped.push(path);
        }
    }
    Ok(summary)
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// The Hyperband bracket sequence for the given budgets.
pub fn cmd_schedule(min_budget: f64, max_budget: f64, eta: f64) -> Result<Vec<BracketSpec>> {
    Ok(hyperband_brackets(&HyperbandParams::new(
        min_budget, max_budget, eta,
    )?))
}

/// Aligned text table, one row per bracket.
pub fn format_schedule(brackets: &[BracketSpec]) -> String {
    let rows: Vec<[String; 5]> = brackets
        .iter()
        .map(|b| {
            let stages = b
                .stages
                .iter()
                .map(|st| format!("({},{})", st.count, st.budget))
                .collect::<Vec<_>>()
                .join(" ");
            [
                b.s.to_string(),
                b.n.to_string(),
                b.initial_budget.to_string(),
                b.total_budget().to_string(),
                stages,
            ]
        })
        .collect();
    let header = ["s", "n", "b0", "total", "stages"];
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: [&str; 5]| {
        for (i, cell) in cells[..4].iter().enumerate() {
            write!(out, "{cell:>w$}  ", w = widths[i]).unwrap();
        }
        writeln!(out, "{}", cells[4]).unwrap();
    };
    line(header);
    for row in &rows {
        line([&row[0], &row[1], &row[2], &row[3], &row[4]]);
    }
    out
}

/// Points at which a report samples the incumbent regret.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Linear {
        start: f64,
        stop: f64,
        points: usize,
    },
    Log {
        start: f64,
        stop: f64,
        points: usize,
    },
    List(Vec<f64>),
}

impl std::str::FromStr for Grid {
    type Err = Error;

    /// `linear:START:STOP:N`, `log:START:STOP:N` or a comma separated list.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: String| Error::invalid("grid", reason);
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("`{v}` is not a number")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [kind @ ("linear" | "log"), start, stop, points] => {
                let (start, stop) = (num(start)?, num(stop)?);
                let points = points
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("`{points}` is not a point count")))?;
                if *kind == "linear" {
                    Grid::Linear {
                        start,
                        stop,
                        points,
                    }
                } else {
                    Grid::Log {
                        start,
                        stop,
                        points,
                    }
                }
            }
            [list] => Grid::List(list.split(',').map(num).collect::<Result<_>>()?),
            _ => return Err(bad(format!("unrecognized grid `{s}`"))),
        };
        grid.points()?;
        Ok(grid)
    }
}

impl Grid {
    /// The grid values; errors unless strictly increasing and finite.
    pub fn points(&self) -> Result<Vec<f64>> {
        let bad = |reason: &str| Err(Error::invalid("grid", reason));
        let pts = match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Linear {
                start,
                stop,
                points,
            }
            | Grid::Log {
                start,
                stop,
                points,
            } => {
                if points < 2 {
                    return bad("need at least two points");
                }
                let log = matches!(self, Grid::Log { .. });
                if log && !(start > 0.0) {
                    return bad("log grid must start above zero");
                }
                let (a, b) = if log {
                    (start.ln(), stop.ln())
                } else {
                    (start, stop)
                };
                let step = (b - a) / (points - 1) as f64;
                (0..points)
                    .map(|i| match i {
                        0 => start,
                        i if i == points - 1 => stop,
                        i if log => (a + step * i as f64).exp(),
                        i => a + step * i as f64,
                    })
                    .collect()
            }
        };
        if pts.is_empty() || pts.iter().any(|v| !v.is_finite()) {
            return bad("grid values must be finite and non-empty");
        }
        if pts.windows(2).any(|w| w[0] >= w[1]) {
            return bad("grid must be strictly increasing");
        }
        Ok(pts)
    }
}

/// Mean incumbent regret of one optimizer across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportColumn {
    pub optimizer: OptimizerKind,
    pub runs: usize,
    /// `None` where some run had no incumbent yet.
    pub mean: Vec<Option<f64>>,
    pub sem: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub axis: Axis,
    pub benchmark_id: String,
    pub grid: Vec<f64>,
    pub columns: Vec<ReportColumn>,
}

/// Missing-value marker in CSV output.
pub const MISSING: &str = "NA";

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.axis {
            Axis::Budget => "budget",
            Axis::Time => "time",
        });
        for c in &self.columns {
            let name = c.optimizer.as_str();
            write!(out, ",{name}_mean,{name}_sem,{name}_runs").unwrap();
        }
        out.push('\n');
        let cell = |v: Option<f64>| v.map_or(MISSING.to_string(), |v| v.to_string());
        for (i, t) in self.grid.iter().enumerate() {
            write!(out, "{t}").unwrap();
            for c in &self.columns {
                write!(out, ",{},{},{}", cell(c.mean[i]), cell(c.sem[i]), c.runs).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Mean and standard error of the mean (sample standard deviation over
/// `sqrt(n)`, zero for a single value).
pub fn mean_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregates trajectories from run directories (each written by
/// [`cmd_run`]) onto `grid`. Directories with the same optimizer pool their
/// runs.
pub fn cmd_report(dirs: &[PathBuf], grid: &Grid, axis: Axis) -> Result<Report> {
    if dirs.is_empty() {
        return Err(Error::invalid("inputs", "no run directories given"));
    }
    let grid = grid.points()?;
    let mut benchmark_id: Option<String> = None;
    let mut groups: BTreeMap<usize, (OptimizerKind, Vec<Trajectory>)> = BTreeMap::new();
    for dir in dirs {
        let manifest = Manifest::read(dir)?;
        match &benchmark_id {
            None => benchmark_id = Some(manifest.benchmark_id.clone()),
            Some(id) if *id != manifest.benchmark_id => {
                return Err(Error::invalid(
                    "inputs",
                    format!(
                        "mixed benchmarks in one report: {id} and {}",
                        manifest.benchmark_id
                    ),
                ))
            }
            Some(_) => {}
        }
        let optimizer = manifest.config.optimizer;
        let rank = OptimizerKind::ALL
            .iter()
            .position(|k| *k == optimizer)
            .unwrap();
        let entry = groups
            .entry(rank)
            .or_insert_with(|| (optimizer, Vec::new()));
        for path in trajectory_files(dir)? {
            entry.1.push(Trajectory::read(&path)?);
        }
    }

    let mut columns = Vec::with_capacity(groups.len());
    for (optimizer, runs) in groups.into_values() {
        if runs.is_empty() {
            return Err(Error::invalid(
                "inputs",
                format!("no trajectory files for optimizer {optimizer}"),
            ));
        }
        let (mean, sem) = grid
            .iter()
            .map(|&t| {
                let values: Option<Vec<f64>> = runs.iter().map(|r| r.regret_at(axis, t)).collect();
                match values {
                    Some(v) => {
                        let (m, s) = mean_sem(&v);
                        (Some(m), Some(s))
                    }
                    None => (None, None),
                }
            })
            .unzip();
        columns.push(ReportColumn {
            optimizer,
            runs: runs.len(),
            mean,
            sem,
        });
    }
    Ok(Report {
        axis,
        benchmark_id: benchmark_id.unwrap_or_default(),
        grid,
        columns,
    })
}

/// `*.jsonl` files of a run directory in name order.
pub fn trajectory_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "jsonl") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}
