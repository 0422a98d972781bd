//! Mixed continuous / integer / categorical search spaces.
//!
//! Every configuration has an internal *unit* representation: continuous and
//! integer dimensions live in `[0, 1]` (optionally through a log transform),
//! categorical dimensions hold the choice index. The density model works only
//! on unit vectors; external values are produced on demand by [`ConfigurationSpace::from_unit`].

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ParamKind {
    Continuous {
        lower: f64,
        upper: f64,
        #[serde(default)]
        log: bool,
    },
    Integer {
        lower: i64,
        upper: i64,
        #[serde(default)]
        log: bool,
    },
    Categorical {
        choices: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ParamKind,
}

impl ParameterSpec {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            kind: ParamKind::Continuous {
                lower,
                upper,
                log: false,
            },
        }
    }

    pub fn log_continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            kind: ParamKind::Continuous {
                lower,
                upper,
                log: true,
            },
        }
    }

    pub fn integer(name: impl Into<String>, lower: i64, upper: i64, log: bool) -> Self {
        Self {
            name: name.into(),
            kind: ParamKind::Integer { lower, upper, log },
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        choices: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: ParamKind::Categorical {
                choices: choices.into_iter().map(Into::into).collect(),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidSpace(format!("`{}`: {reason}", self.name)));
        match &self.kind {
            ParamKind::Continuous { lower, upper, log } => {
                if !(lower.is_finite() && upper.is_finite()) {
                    return bad("bounds must be finite".into());
                }
                if lower >= upper {
                    return bad(format!("lower {lower} must be < upper {upper}"));
                }
                if *log && *lower <= 0.0 {
                    return bad(format!("log scale needs lower > 0, got {lower}"));
                }
            }
            ParamKind::Integer { lower, upper, log } => {
                if lower >= upper {
                    return bad(format!("lower {lower} must be < upper {upper}"));
                }
                if *log && *lower <= 0 {
                    return bad(format!("log scale needs lower > 0, got {lower}"));
                }
            }
            ParamKind::Categorical { choices } => {
                if choices.len() < 2 {
                    return bad("categorical needs at least 2 choices".into());
                }
                let distinct: HashSet<_> = choices.iter().collect();
                if distinct.len() != choices.len() {
                    return bad("categorical choices must be distinct".into());
                }
            }
        }
        Ok(())
    }

    /// Kind of the unit-space coordinate this parameter occupies.
    pub fn dim_kind(&self) -> DimKind {
        match &self.kind {
            ParamKind::Categorical { choices } => DimKind::Categorical(choices.len()),
            _ => DimKind::Continuous,
        }
    }
}

/// How a unit-space coordinate is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimKind {
    Continuous,
    /// Categorical with the given cardinality.
    Categorical(usize),
}

/// An externally meaningful parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Float(f64),
    Int(i64),
    Choice(usize),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Choice(v) => write!(f, "#{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfigId(pub u64);

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Hands out configuration ids. One generator per optimizer run keeps ids
/// reproducible across runs in the same process.
#[derive(Debug, Default)]
pub struct IdGen(AtomicU64);

impl IdGen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&self) -> ConfigId {
        ConfigId(self.0.fetch_add(1, Ordering::Relaxed))
    }
}

/// A point of a [`ConfigurationSpace`] in unit representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    id: ConfigId,
    unit: Vec<f64>,
}

impl Configuration {
    /// Wraps a unit vector. The caller is responsible for validity; use
    /// [`ConfigurationSpace::configuration`] for a checked constructor.
    pub fn from_unit_unchecked(id: ConfigId, unit: Vec<f64>) -> Self {
        Self { id, unit }
    }

    pub fn id(&self) -> ConfigId {
        self.id
    }

    pub fn unit(&self) -> &[f64] {
        &self.unit
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationSpace {
    params: Vec<ParameterSpec>,
}

#[derive(Deserialize)]
struct SpaceFile {
    #[serde(rename = "parameter")]
    parameters: Vec<ParameterSpec>,
}

impl ConfigurationSpace {
    pub fn new(params: Vec<ParameterSpec>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidSpace("space has no parameters".into()));
        }
        let mut names = HashSet::new();
        for p in &params {
            p.validate()?;
            if !names.insert(p.name.as_str()) {
                return Err(Error::InvalidSpace(format!(
                    "duplicate parameter name `{}`",
                    p.name
                )));
            }
        }
        Ok(Self { params })
    }

    /// Parses a space definition in TOML:
    ///
    /// ```toml
    /// [[parameter]]
    /// name = "learning_rate"
    /// kind = "continuous"
    /// lower = 1e-6
    /// upper = 1e-2
    /// log = true
    ///
    /// [[parameter]]
    /// name = "optimizer"
    /// kind = "categorical"
    /// choices = ["adam", "sgd"]
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SpaceFile = toml::from_str(text).map_err(|e| Error::Parse {
            what: "space definition".into(),
            reason: e.to_string(),
        })?;
        Self::new(file.parameters)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn params(&self) -> &[ParameterSpec] {
        &self.params
    }

    /// Number of parameters.
    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn dim_kinds(&self) -> Vec<DimKind> {
        self.params.iter().map(ParameterSpec::dim_kind).collect()
    }

    /// Draws a configuration uniformly: unit coordinates ~ U[0, 1], categories uniform.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R, ids: &IdGen) -> Configuration {
        let unit = self
            .params
            .iter()
            .map(|p| match p.dim_kind() {
                DimKind::Continuous => rng.random::<f64>(),
                DimKind::Categorical(c) => rng.random_range(0..c) as f64,
            })
            .collect();
        Configuration {
            id: ids.next_id(),
            unit,
        }
    }

    /// Checked constructor from a unit vector.
    pub fn configuration(&self, unit: Vec<f64>, ids: &IdGen) -> Result<Configuration> {
        self.check_unit(&unit)?;
        Ok(Configuration {
            id: ids.next_id(),
            unit,
        })
    }

    pub fn check_unit(&self, unit: &[f64]) -> Result<()> {
        if unit.len() != self.dim() {
            return Err(Error::Contract(format!(
                "unit vector has {} entries, space has {}",
                unit.len(),
                self.dim()
            )));
        }
        for (p, &u) in self.params.iter().zip(unit) {
            let ok = match p.dim_kind() {
                DimKind::Continuous => (0.0..=1.0).contains(&u),
                DimKind::Categorical(c) => u >= 0.0 && u.fract() == 0.0 && (u as usize) < c,
            };
            if !ok {
                return Err(Error::OutOfBounds {
                    name: p.name.clone(),
                    detail: format!("unit value {u}"),
                });
            }
        }
        Ok(())
    }

    /// Maps external values to the unit representation.
    pub fn to_unit(&self, values: &[ParamValue]) -> Result<Vec<f64>> {
        if values.len() != self.dim() {
            return Err(Error::Contract(format!(
                "expected {} values, got {}",
                self.dim(),
                values.len()
            )));
        }
        self.params
            .iter()
            .zip(values)
            .map(|(p, v)| param_to_unit(p, *v))
            .collect()
    }

    /// Maps a unit vector back to external values. Integer dimensions are
    /// rounded to the nearest integer here and only here.
    pub fn from_unit(&self, unit: &[f64]) -> Result<Vec<ParamValue>> {
        self.check_unit(unit)?;
        Ok(self
            .params
            .iter()
            .zip(unit)
            .map(|(p, &u)| match &p.kind {
                ParamKind::Continuous { lower, upper, log } => {
                    ParamValue::Float(unscale(u, *lower, *upper, *log).clamp(*lower, *upper))
                }
                ParamKind::Integer { lower, upper, log } => {
                    let x = unscale(u, *lower as f64, *upper as f64, *log).round() as i64;
                    ParamValue::Int(x.clamp(*lower, *upper))
                }
                ParamKind::Categorical { .. } => ParamValue::Choice(u as usize),
            })
            .collect())
    }

    /// External values of a configuration keyed by parameter name.
    pub fn describe(&self, config: &Configuration) -> Result<Vec<(String, ParamValue)>> {
        let values = self.from_unit(config.unit())?;
        Ok(self
            .params
            .iter()
            .map(|p| p.name.clone())
            .zip(values)
            .collect())
    }
}

fn scale(x: f64, lower: f64, upper: f64, log: bool) -> f64 {
    if log {
        (x.ln() - lower.ln()) / (upper.ln() - lower.ln())
    } else {
        (x - lower) / (upper - lower)
    }
}

fn unscale(u: f64, lower: f64, upper: f64, log: bool) -> f64 {
    if log {
        (lower.ln() + u * (upper.ln() - lower.ln())).exp()
    } else {
        lower + u * (upper - lower)
    }
}

fn param_to_unit(p: &ParameterSpec, v: ParamValue) -> Result<f64> {
    let oob = |detail: String| Error::OutOfBounds {
        name: p.name.clone(),
        detail,
    };
    match (&p.kind, v) {
        (ParamKind::Continuous { lower, upper, log }, ParamValue::Float(x)) => {
            if !(x >= *lower && x <= *upper) {
                return Err(oob(format!("{x} not in [{lower}, {upper}]")));
            }
            Ok(scale(x, *lower, *upper, *log).clamp(0.0, 1.0))
        }
        (ParamKind::Integer { lower, upper, log }, ParamValue::Int(x)) => {
            if x < *lower || x > *upper {
                return Err(oob(format!("{x} not in [{lower}, {upper}]")));
            }
            Ok(scale(x as f64, *lower as f64, *upper as f64, *log).clamp(0.0, 1.0))
        }
        (ParamKind::Categorical { choices }, ParamValue::Choice(i)) => {
            if i >= choices.len() {
                return Err(oob(format!("choice {i} >= cardinality {}", choices.len())));
            }
            Ok(i as f64)
        }
        (_, other) => Err(oob(format!("value {other} has the wrong type"))),
    }
}
