use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controllability::FlowCase;
use crate::dynamics::{Activation, Loss};
use crate::meanfield::GaussianSpread;
use crate::optimize::{BoxDomain, PgdOptions};
use crate::{Error, Result};

/// Every experiment's parameters. Missing keys take the reference values, so an
/// empty document reproduces the reference runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub decay: DecayConfig,
    pub micro: MicroConfig,
    pub meanfield: MeanFieldConfig,
    pub hum: HumConfig,
    pub static_control: StaticControlConfig,
    pub consistency: ConsistencyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            output_dir: PathBuf::from("out"),
            decay: DecayConfig::default(),
            micro: MicroConfig::default(),
            meanfield: MeanFieldConfig::default(),
            hum: HumConfig::default(),
            static_control: StaticControlConfig::default(),
            consistency: ConsistencyConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayCurve {
    pub label: String,
    pub case: FlowCase,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub x0: f64,
    pub y: f64,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub omega: f64,
    /// `|Φ − y|` level whose first crossing time is reported per curve.
    pub threshold: f64,
    pub closed_form_panels: usize,
    pub curves: Vec<DecayCurve>,
}

impl Default for DecayConfig {
    fn default() -> Self {
        let curve = |label: &str, case, alpha| DecayCurve {
            label: label.into(),
            case,
            alpha,
        };
        Self {
            x0: 2.0,
            y: 0.0,
            t0: 0.0,
            t_end: 1.0,
            dt: 0.01,
            omega: -3.0,
            threshold: 0.2,
            closed_form_panels: 2048,
            curves: vec![
                curve("a", FlowCase::Power, 0.0),
                curve("b", FlowCase::Power, 4.0),
                curve("c", FlowCase::Exp, 4.0),
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxConfig {
    pub w_min: f64,
    pub w_max: f64,
    pub b_min: f64,
    pub b_max: f64,
}

impl Default for BoxConfig {
    fn default() -> Self {
        Self {
            w_min: 0.0,
            w_max: 0.25,
            b_min: 0.0,
            b_max: 2.5e-3,
        }
    }
}

impl BoxConfig {
    pub fn domain(&self) -> Result<BoxDomain> {
        BoxDomain::new(self.w_min, self.w_max, self.b_min, self.b_max)
    }
}

/// Where the surrogate observations sit on the parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum NodePlacement {
    /// Seeded Latin-hypercube strata snapped to distinct grid points.
    Stratified,
    /// Row-major grid indices (`w` outermost).
    Explicit { indices: Vec<usize> },
}

/// Starting point of the descent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum StartPoint {
    /// Box corner farthest from the surrogate's grid minimiser.
    FarthestCorner,
    Point {
        w: f64,
        b: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub nodes: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub noise_cov: f64,
    pub placement: NodePlacement,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            nodes: 20,
            gamma: 1e-2,
            lambda: 0.0,
            noise_cov: 0.0,
            placement: NodePlacement::Stratified,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescentConfig {
    pub step: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step_tol: f64,
    pub start: StartPoint,
}

impl Default for DescentConfig {
    fn default() -> Self {
        let d = PgdOptions::default();
        Self {
            step: d.step,
            max_iters: d.max_iters,
            grad_tol: d.grad_tol,
            step_tol: d.step_tol,
            start: StartPoint::FarthestCorner,
        }
    }
}

impl DescentConfig {
    pub fn options(&self) -> PgdOptions {
        PgdOptions {
            step: self.step,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            step_tol: self.step_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicroConfig {
    pub particles: usize,
    pub activation: Activation,
    pub loss: Loss,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub x0_min: f64,
    pub x0_max: f64,
    #[serde(rename = "box")]
    pub domain: BoxConfig,
    pub grid_w: usize,
    pub grid_b: usize,
    pub surrogate: SurrogateConfig,
    pub descent: DescentConfig,
    /// Surrogate document to reuse in the descent instead of refitting.
    pub surrogate_path: Option<PathBuf>,
}

impl Default for MicroConfig {
    fn default() -> Self {
        Self {
            particles: 50,
            activation: Activation::Relu,
            loss: Loss::Square,
            t0: 0.0,
            t_end: 10.0,
            dt: 1e-2,
            x0_min: 1.0,
            x0_max: 2.0,
            domain: BoxConfig::default(),
            grid_w: 26,
            grid_b: 26,
            surrogate: SurrogateConfig::default(),
            descent: DescentConfig::default(),
            surrogate_path: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadKind {
    Variance,
    StdDev,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanFieldConfig {
    pub activation: Activation,
    pub loss: Loss,
    pub xmin: f64,
    pub xmax: f64,
    pub dx: f64,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub initial_mean: f64,
    pub initial_spread: f64,
    pub spread_kind: SpreadKind,
    #[serde(rename = "box")]
    pub domain: BoxConfig,
    pub grid_w: usize,
    pub grid_b: usize,
    pub samples: usize,
    pub repeats: usize,
    pub surrogate: SurrogateConfig,
    pub descent: DescentConfig,
    pub surrogate_path: Option<PathBuf>,
    /// Solver steps between stored density snapshots.
    pub snapshot_every: usize,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        Self {
            activation: Activation::Relu,
            loss: Loss::Abs,
            xmin: 0.0,
            xmax: 3.0,
            dx: 0.1,
            t0: 0.0,
            t_end: 1.0,
            dt: 1e-2,
            initial_mean: 1.5,
            initial_spread: 0.1,
            spread_kind: SpreadKind::Variance,
            domain: BoxConfig::default(),
            grid_w: 13,
            grid_b: 13,
            samples: 100,
            repeats: 100,
            surrogate: SurrogateConfig::default(),
            descent: DescentConfig::default(),
            surrogate_path: None,
            snapshot_every: 25,
        }
    }
}

impl MeanFieldConfig {
    pub fn spread(&self) -> GaussianSpread {
        match self.spread_kind {
            SpreadKind::Variance => GaussianSpread::Variance(self.initial_spread),
            SpreadKind::StdDev => GaussianSpread::StdDev(self.initial_spread),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumConfig {
    /// Row-major `d × d` weight, constant in time.
    pub weight: Vec<Vec<f64>>,
    /// Stacked initial states `(x₁, …, x_M)`, each of length `d`.
    pub x0: Vec<f64>,
    pub y: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl Default for HumConfig {
    fn default() -> Self {
        Self {
            weight: vec![vec![0.0]],
            x0: vec![0.0],
            y: vec![1.0],
            t0: 0.0,
            t_end: 1.0,
            dt: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticControlConfig {
    pub case: FlowCase,
    pub omega: f64,
    pub alpha: f64,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub particles: usize,
    pub x0_min: f64,
    pub x0_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for StaticControlConfig {
    fn default() -> Self {
        Self {
            case: FlowCase::Exp,
            omega: -3.0,
            alpha: 4.0,
            t0: 0.0,
            t_end: 1.0,
            dt: 1e-3,
            particles: 8,
            x0_min: 1.0,
            x0_max: 2.0,
            y_min: -1.0,
            y_max: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsistencyConfig {
    pub sample_sizes: Vec<usize>,
    /// Independent push-forwards per sample size, for the standard error.
    pub repeats: usize,
    /// Parameters of the transport; defaults to the centre of the mean-field grid.
    pub w: Option<f64>,
    pub b: Option<f64>,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        Self {
            sample_sizes: vec![100, 1_000, 10_000],
            repeats: 10,
            w: None,
            b: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads `path` (if any) and applies `key.path=value` overrides on top.
    /// Values are parsed as TOML and fall back to plain strings.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        let mut doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::config(format!("override `{item}` is not key=value")))?;
            set_path(&mut doc, key.trim(), parse_value(raw.trim()))?;
        }
        toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key just written"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_path(doc: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(format!("malformed override key `{key}`")));
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("override `{key}`: `{part}` is not a section")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
