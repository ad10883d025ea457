//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "dimension": 3,
//!   "radius_R": 5.0,
//!   "incident_direction": [1, 0, 0],
//!   "receiver_directions": [[0, 1, 0], ...],
//!   "mode": "fixed",
//!   "k_min": 0.3141592653589793,
//!   "N": 16,
//!   "L": 15,
//!   "scatterers": [
//!     {"position": [2, 2, 2], "semiaxes": [0.2, 0.2, 0.1], "q1": -0.5, "q2": 0.5},
//!     {"position": [-1, -3, -1], "moment_q1": 0.0084, "moment_q2": 0.0}
//!   ],
//!   "noise_level": 0.1,
//!   "seed": 7,
//!   "grid": {"lower": [-5, -5, -5], "upper": [5, 5, 5], "points": [41, 41, 41]}
//! }
//! ```
//!
//! `noise_mode` (`"global"` or `"entrywise"`) is optional and defaults to
//! global calibration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{NoiseMode, NoiseSpec};
use crate::model::{
    validate_experiment, AcquisitionGeometry, AcquisitionMode, FrequencyGrid, ImagingGrid,
    Scatterer, ScattererEnsemble,
};
use crate::presets::Experiment;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScattererConfig {
    Shaped {
        position: Vec<f64>,
        semiaxes: Vec<f64>,
        q1: f64,
        q2: f64,
    },
    Moments {
        position: Vec<f64>,
        moment_q1: f64,
        moment_q2: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    #[serde(rename = "radius_R")]
    pub radius_r: f64,
    #[serde(default)]
    pub incident_direction: Vec<f64>,
    pub receiver_directions: Vec<Vec<f64>>,
    pub mode: AcquisitionMode,
    pub k_min: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub scatterers: Vec<ScattererConfig>,
    #[serde(default)]
    pub noise_level: f64,
    #[serde(default)]
    pub noise_mode: NoiseMode,
    #[serde(default)]
    pub seed: u64,
    pub grid: ImagingGrid,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            level: self.noise_level,
            seed: self.seed,
            mode: self.noise_mode,
        }
    }

    /// Build the experiment without checking admissibility.
    pub fn experiment(&self) -> Experiment {
        let scatterers = self
            .scatterers
            .iter()
            .map(|s| match s {
                ScattererConfig::Shaped {
                    position,
                    semiaxes,
                    q1,
                    q2,
                } => Scatterer::ellipsoid(position.clone(), semiaxes.clone(), *q1, *q2),
                ScattererConfig::Moments {
                    position,
                    moment_q1,
                    moment_q2,
                } => Scatterer::point(position.clone(), *moment_q1, *moment_q2),
            })
            .collect();
        let incident =
            if self.incident_direction.is_empty() && self.mode == AcquisitionMode::Backscattering {
                vec![0.0; self.dimension]
            } else {
                self.incident_direction.clone()
            };
        Experiment {
            ensemble: ScattererEnsemble::new(scatterers, self.radius_r),
            geometry: AcquisitionGeometry {
                dimension: self.dimension,
                incident_direction: incident,
                receiver_directions: self.receiver_directions.clone(),
                mode: self.mode,
            },
            grid: FrequencyGrid::new(self.k_min, self.n, self.l),
            imaging: self.grid.clone(),
        }
    }

    /// Build the experiment and reject it if any admissibility condition
    /// (including the imaging grid and noise level) fails.
    pub fn validated(&self) -> Result<Experiment> {
        let ex = self.experiment();
        let mut report = validate_experiment(&ex.ensemble, &ex.geometry, &ex.grid);
        report.violations.extend(
            ex.imaging
                .validate(ex.geometry.dimension, ex.ensemble.radius),
        );
        if !(0.0..1.0).contains(&self.noise_level) {
            report
                .violations
                .push(crate::model::Violation::Dimension(format!(
                    "noise_level = {} must lie in [0, 1)",
                    self.noise_level
                )));
        }
        if report.is_valid() {
            Ok(ex)
        } else {
            Err(Error::Validation(report.violations))
        }
    }

    pub fn from_experiment(ex: &Experiment, noise: &NoiseSpec) -> Self {
        ExperimentConfig {
            dimension: ex.geometry.dimension,
            radius_r: ex.ensemble.radius,
            incident_direction: ex.geometry.incident_direction.clone(),
            receiver_directions: ex.geometry.receiver_directions.clone(),
            mode: ex.geometry.mode,
            k_min: ex.grid.k_min,
            n: ex.grid.n,
            l: ex.grid.l,
            scatterers: ex
                .ensemble
                .scatterers
                .iter()
                .map(|s| match &s.shape {
                    Some(shape) => ScattererConfig::Shaped {
                        position: s.position.clone(),
                        semiaxes: shape.semiaxes.clone(),
                        q1: shape.q1,
                        q2: shape.q2,
                    },
                    None => ScattererConfig::Moments {
                        position: s.position.clone(),
                        moment_q1: s.moment_q1,
                        moment_q2: s.moment_q2,
                    },
                })
                .collect(),
            noise_level: noise.level,
            noise_mode: noise.mode,
            seed: noise.seed,
            grid: ex.imaging.clone(),
        }
    }
}
