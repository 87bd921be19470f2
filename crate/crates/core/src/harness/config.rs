use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lcu::AmpMode;
use crate::registers::DEFAULT_QUBIT_CAP;
use crate::spectra::{Model, ModelSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LcuFourier,
    Grid,
    Combined,
    GridEstimate,
    CombinedEstimate,
    Pea,
    PeaUnknown,
    PeaEstimate,
    Filter,
    FilterUnknown,
    FilterCombined,
    FilterEstimate,
    Chebwalk,
    ChebwalkGrid,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LcuFourier => "lcu-fourier",
            Method::Grid => "grid",
            Method::Combined => "combined",
            Method::GridEstimate => "grid-estimate",
            Method::CombinedEstimate => "combined-estimate",
            Method::Pea => "pea",
            Method::PeaUnknown => "pea-unknown",
            Method::PeaEstimate => "pea-estimate",
            Method::Filter => "filter",
            Method::FilterUnknown => "filter-unknown",
            Method::FilterCombined => "filter-combined",
            Method::FilterEstimate => "filter-estimate",
            Method::Chebwalk => "chebwalk",
            Method::ChebwalkGrid => "chebwalk-grid",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        toml::Value::String(s.into()).try_into().map_err(|_| Error::Parse(format!("unknown method `{s}`")))
    }

    fn needs_walk_spectrum(self) -> bool {
        matches!(self, Method::Chebwalk | Method::ChebwalkGrid)
    }
}

/// Swept parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Instance gap; the gap bound follows it.
    Delta,
    Eps,
    /// Trial overlap; the overlap bound follows it.
    Chi,
    Xi,
    Kappa,
    Dim,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self> {
        toml::Value::String(s.into()).try_into().map_err(|_| Error::Parse(format!("unknown axis `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// Algorithm parameters shared by all methods; unset ones fall back to the
/// instance (true gap, true overlap).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunParams {
    pub delta_lb: Option<f64>,
    pub chi: Option<f64>,
    pub eps: f64,
    pub xi: Option<f64>,
    pub kappa: Option<f64>,
    /// `lambda_0 - E` for the known-energy methods.
    pub energy_guess_error: f64,
    /// Absolute energy guess; overrides `energy_guess_error`.
    pub energy: Option<f64>,
    pub mode: AmpMode,
    pub grid_cap: Option<usize>,
    pub literal: bool,
    pub sparsity: Option<usize>,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            delta_lb: None,
            chi: None,
            eps: 1e-2,
            xi: None,
            kappa: None,
            energy_guess_error: 0.0,
            energy: None,
            mode: AmpMode::Fps,
            grid_cap: None,
            literal: false,
            sparsity: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub instance: ModelSpec,
    /// Magnitude of the ground overlap of the trial state.
    pub overlap: f64,
    #[serde(default)]
    pub params: RunParams,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Keep the instance seed fixed; otherwise it is offset by the trial index.
    #[serde(default)]
    pub fixed_instance: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_cap")]
    pub qubit_cap: usize,
    #[serde(default)]
    pub record_wall_time: bool,
}

fn one() -> usize {
    1
}

fn default_cap() -> usize {
    DEFAULT_QUBIT_CAP
}

impl ExperimentConfig {
    pub fn new(method: Method, instance: ModelSpec, overlap: f64) -> Self {
        Self {
            method,
            instance,
            overlap,
            params: RunParams::default(),
            sweep: None,
            trials: 1,
            seed: 0,
            fixed_instance: false,
            output: None,
            format: Format::Csv,
            qubit_cap: DEFAULT_QUBIT_CAP,
            record_wall_time: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("trials must be positive");
        }
        if !(self.overlap > 0.0 && self.overlap <= 1.0) {
            return invalid(format!("overlap {} outside (0, 1]", self.overlap));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return invalid("empty sweep");
            }
            if s.values.iter().any(|v| !(*v > 0.0) && !(s.axis == Axis::Kappa && *v == 0.0)) {
                return invalid("sweep values must be positive");
            }
            if s.values.windows(2).any(|w| w[0] >= w[1]) {
                return invalid("sweep values must be strictly increasing");
            }
        }
        Ok(())
    }

    /// Sweep points, or one point with no value.
    pub fn points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }

    /// Instance, trial overlap and parameters at one sweep point.
    pub(crate) fn at(&self, value: Option<f64>, trial: usize) -> Result<(ModelSpec, f64, RunParams)> {
        let mut spec = self.instance.clone();
        if !self.fixed_instance {
            spec.seed = spec.seed.wrapping_add(trial as u64);
        }
        if self.method.needs_walk_spectrum() {
            spec = spec.walk();
        }
        let mut overlap = self.overlap;
        let mut p = self.params.clone();
        if let (Some(v), Some(s)) = (value, &self.sweep) {
            match s.axis {
                Axis::Delta => {
                    set_gap(&mut spec.model, v)?;
                    p.delta_lb = Some(v);
                }
                Axis::Eps => p.eps = v,
                Axis::Chi => {
                    overlap = v;
                    p.chi = Some(v);
                }
                Axis::Xi => p.xi = Some(v),
                Axis::Kappa => p.kappa = Some(v),
                Axis::Dim => set_dim(&mut spec.model, v)?,
            }
        }
        Ok((spec, overlap, p))
    }
}

fn set_gap(m: &mut Model, v: f64) -> Result<()> {
    match m {
        Model::RandomHermitian { gap, .. } => *gap = v,
        _ => return invalid("gap sweeps need the random-hermitian model"),
    }
    Ok(())
}

fn set_dim(m: &mut Model, v: f64) -> Result<()> {
    let n = v.round() as usize;
    match m {
        Model::RandomHermitian { dim, .. } | Model::Adversarial { dim, .. } => *dim = n,
        Model::TransverseIsing { sites, .. } => *sites = n.max(2).trailing_zeros() as usize,
        Model::Diagonal { .. } => return invalid("dimension sweeps need a generated model"),
    }
    Ok(())
}
