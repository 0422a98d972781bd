//! Timestamped evaluation log, one JSON record per line.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::configspace::ConfigId;
use crate::error::{Error, Result};
use crate::sampler::Provenance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    EvalEnd,
    Incumbent,
}

/// One trajectory line. Field order is the on-disk order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub event: EventKind,
    /// Simulated seconds (or wall seconds in realtime mode).
    pub sim_time: f64,
    /// Budget consumed by completed evaluations so far.
    pub cum_budget: f64,
    pub sh_run: usize,
    pub stage: usize,
    pub budget: f64,
    pub config_id: ConfigId,
    /// `null` on disk for failed (`+inf`) evaluations.
    #[serde(with = "inf_as_null")]
    pub loss: f64,
    pub provenance: Provenance,
    /// Regret of the record's configuration; `null` without an exact oracle.
    pub regret: Option<f64>,
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Which clock a report or query measures progress in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    #[default]
    Budget,
    Time,
}

impl Record {
    pub fn at(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Budget => self.cum_budget,
            Axis::Time => self.sim_time,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    records: Vec<Record>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn evaluations(&self) -> impl Iterator<Item = &Record> {
        self.records
            .iter()
            .filter(|r| r.event == EventKind::EvalEnd)
    }

    pub fn incumbents(&self) -> impl Iterator<Item = &Record> {
        self.records
            .iter()
            .filter(|r| r.event == EventKind::Incumbent)
    }

    /// Regret of the incumbent as of the last incumbent record with
    /// position `<= t` on `axis`; `None` before the first incumbent.
    pub fn regret_at(&self, axis: Axis, t: f64) -> Option<f64> {
        self.incumbents()
            .take_while(|r| r.at(axis) <= t)
            .last()
            .and_then(|r| r.regret)
    }

    /// First position on `axis` at which the incumbent regret is `<= threshold`.
    pub fn first_reaching(&self, axis: Axis, threshold: f64) -> Option<f64> {
        self.incumbents()
            .find(|r| r.regret.is_some_and(|g| g <= threshold))
            .map(|r| r.at(axis))
    }

    pub fn final_regret(&self) -> Option<f64> {
        self.incumbents().last().and_then(|r| r.regret)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            // Serializing plain structs into a String cannot fail.
            let line = serde_json::to_string(r).expect("record serializes");
            writeln!(out, "{line}").unwrap();
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    what: format!("trajectory line {}", i + 1),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { records })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }
}

/// First position on `axis` at which the mean incumbent regret across `runs`
/// is `<= threshold`. Candidate positions are the runs' incumbent events; the
/// mean is only defined once every run has an incumbent with a regret.
pub fn mean_first_reaching(runs: &[Trajectory], axis: Axis, threshold: f64) -> Option<f64> {
    let mut points: Vec<f64> = runs
        .iter()
        .flat_map(|t| t.incumbents().map(|r| r.at(axis)))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points.into_iter().find(|&t| {
        let regrets: Option<Vec<f64>> = runs.iter().map(|r| r.regret_at(axis, t)).collect();
        regrets.is_some_and(|v| v.iter().sum::<f64>() / v.len() as f64 <= threshold)
    })
}
