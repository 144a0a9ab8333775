//! JSON run configuration.

use crate::basis::HermiteBasis;
use crate::control::ControlSignal;
use crate::dynamics::{EvolutionConfig, Integrator, MAX_DT};
use crate::error::{Error, Result};
use crate::state::SpectralState;
use crate::tensor::C64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

fn default_integrator() -> Integrator {
    Integrator::Strang
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_control() -> ControlSignal {
    ControlSignal::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub index: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    #[default]
    Ground,
    /// A state CSV; relative paths resolve against the config file.
    File { path: PathBuf },
    /// Listed coefficients, all others zero.
    Coefficients { entries: Vec<CoefficientEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub n_modes: usize,
    pub sigma: u8,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "default_integrator")]
    pub integrator: Integrator,
    #[serde(default = "default_control")]
    pub control: ControlSignal,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard_max_iter: Option<usize>,
    /// Keep every `snapshot_stride`-th state (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every field before any computation starts.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::config("dim", format!("must be 1, 2 or 3, got {}", self.dim)));
        }
        if self.n_modes < 2 || !self.n_modes.is_multiple_of(2) {
            return Err(Error::config(
                "n_modes",
                format!("must be even and >= 2, got {}", self.n_modes),
            ));
        }
        if self.sigma > 1 {
            return Err(Error::config("sigma", format!("must be 0 or 1, got {}", self.sigma)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::config("T", format!("must be positive, got {}", self.t_final)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.dt > MAX_DT {
            return Err(Error::config(
                "dt",
                format!("must not exceed {MAX_DT}, got {}", self.dt),
            ));
        }
        self.control
            .validate()
            .map_err(|e| Error::config("control", e.to_string()))?;
        let (start, end) = self.control.domain();
        if start > 0.0 || end < self.t_final * (1.0 - 1e-12) {
            return Err(Error::config(
                "control",
                format!(
                    "defined on [{start}, {end}], which does not cover [0, {}]",
                    self.t_final
                ),
            ));
        }
        if let Some(tol) = self.picard_tol {
            if !(tol > 0.0) {
                return Err(Error::config("picard_tol", format!("must be positive, got {tol}")));
            }
        }
        if self.picard_max_iter == Some(0) {
            return Err(Error::config("picard_max_iter", "must be at least 1"));
        }
        if self.snapshot_stride == Some(0) {
            return Err(Error::config("snapshot_stride", "must be at least 1"));
        }
        if let InitialState::Coefficients { entries } = &self.initial_state {
            for e in entries {
                if e.index.len() != self.dim || e.index.iter().any(|&k| k >= self.n_modes) {
                    return Err(Error::config(
                        "initial_state",
                        format!(
                            "index {:?} outside the {}-dimensional {}-mode basis",
                            e.index, self.dim, self.n_modes
                        ),
                    ));
                }
                if !(e.re.is_finite() && e.im.is_finite()) {
                    return Err(Error::config("initial_state", "non-finite coefficient"));
                }
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<Arc<HermiteBasis>> {
        HermiteBasis::new(self.dim, self.n_modes).map_err(|e| Error::config("n_modes", e.to_string()))
    }

    pub fn evolution(&self) -> EvolutionConfig {
        let mut cfg = EvolutionConfig::strang(self.sigma, self.dt, self.t_final);
        cfg.integrator = self.integrator;
        if let Some(tol) = self.picard_tol {
            cfg.picard_tol = tol;
        }
        if let Some(it) = self.picard_max_iter {
            cfg.picard_max_iter = it;
        }
        cfg
    }

    pub fn initial_state(&self, basis: &Arc<HermiteBasis>) -> Result<SpectralState> {
        match &self.initial_state {
            InitialState::Ground => Ok(SpectralState::ground(basis)),
            InitialState::File { path } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    self.base_dir.join(path)
                };
                let f = std::fs::File::open(&full)
                    .map_err(|e| Error::config("initial_state", format!("cannot open {}: {e}", full.display())))?;
                SpectralState::read_csv(basis, f).map_err(|e| Error::config("initial_state", e.to_string()))
            }
            InitialState::Coefficients { entries } => {
                let mut s = SpectralState::zeros(basis);
                for e in entries {
                    s.coeffs_mut()[ndarray::IxDyn(&e.index)] += C64::new(e.re, e.im);
                }
                Ok(s)
            }
        }
    }
}
