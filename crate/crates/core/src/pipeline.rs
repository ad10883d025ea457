//! Simulate → reconstruct orchestration behind the `mfmusic` binary. Each
//! stage writes its artifacts into an output directory and records itself
//! in `manifest.json` there.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::forward::{
    add_noise, born_farfield, leading_order_farfield, rescale_data, DataVariant, NoiseMode,
    NoiseSpec, DEFAULT_QUAD_ORDER, RNG_ALGORITHM,
};
use crate::imaging::{
    direction_svds, estimate_model_order, extract_peaks, fixed_rank_projectors, i2_selection_size,
    indicator_i1, indicator_i2, Functional, IndicatorField, ModelOrderEstimate, ModelOrderOptions,
    PeakSet,
};
use crate::io::{self, TensorMetadata};
use crate::model::{geometry_fingerprint, FarFieldTensor, Violation};
use crate::presets::Experiment;

pub const TENSOR_FILE: &str = "tensor.csv";
pub const TENSOR_META_FILE: &str = "tensor.meta.json";
pub const FIELD_CSV_FILE: &str = "indicator.csv";
pub const FIELD_VTK_FILE: &str = "indicator.vtk";
pub const PEAKS_FILE: &str = "peaks.json";
pub const SV_FILE: &str = "singular_values.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForwardModel {
    #[default]
    Leading,
    Born,
}

#[derive(Clone, Debug, Default)]
pub struct SimulateOptions {
    pub model: ForwardModel,
    pub quad_order: Option<usize>,
    /// Overrides `noise_level` from the config.
    pub noise: Option<f64>,
    /// Overrides `seed` from the config.
    pub seed: Option<u64>,
    /// Overrides `noise_mode` from the config.
    pub noise_mode: Option<NoiseMode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MTilde {
    Auto,
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Vtk,
    #[default]
    Both,
}

#[derive(Clone, Debug)]
pub struct ReconstructOptions {
    pub functional: Functional,
    pub mtilde: MTilde,
    pub scatterers: Option<usize>,
    pub variant: DataVariant,
    /// Node count per axis (one value for all axes) overriding the config.
    pub grid_points: Option<Vec<usize>>,
    pub out_format: OutFormat,
    pub threshold_fraction: f64,
    pub min_separation: f64,
    pub model_order: ModelOrderOptions,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            functional: Functional::I1,
            mtilde: MTilde::Auto,
            scatterers: None,
            variant: DataVariant::Extended,
            grid_points: None,
            out_format: OutFormat::Both,
            threshold_fraction: 0.5,
            min_separation: 1.0,
            model_order: ModelOrderOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulateRecord {
    pub started_unix: u64,
    pub finished_unix: u64,
    pub model: ForwardModel,
    pub quad_order: Option<usize>,
    pub born_error_estimate: Option<f64>,
    pub noise_level: f64,
    pub noise_mode: NoiseMode,
    pub seed: u64,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructRecord {
    pub started_unix: u64,
    pub finished_unix: u64,
    pub tensor: String,
    pub functional: Functional,
    pub variant: DataVariant,
    /// Projector rank used for the final field.
    pub mtilde: usize,
    /// Scatterer count behind an `I2` field.
    pub scatterers: Option<usize>,
    pub model_order: Option<ModelOrderEstimate>,
    pub grid_points: Vec<usize>,
    pub threshold_fraction: f64,
    pub min_separation: f64,
    pub peaks: usize,
    /// Full spectrum of every direction's Hankel matrix.
    pub singular_values: Vec<Vec<f64>>,
    pub outputs: Vec<String>,
}

/// Reproducibility record of the runs in one output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_path: String,
    pub config_sha256: String,
    pub rng_algorithm: String,
    pub simulate: Option<SimulateRecord>,
    pub reconstruct: Option<ReconstructRecord>,
}

impl RunManifest {
    fn fresh(config_path: &Path, config_sha256: String) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_path: config_path.display().to_string(),
            config_sha256,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            simulate: None,
            reconstruct: None,
        }
    }

    /// Existing manifest of `out_dir` if it was made from the same config,
    /// otherwise a new one.
    fn load_or_new(out_dir: &Path, config_path: &Path, config_sha256: String) -> Self {
        match io::read_json::<RunManifest>(out_dir.join(MANIFEST_FILE)) {
            Ok(m) if m.config_sha256 == config_sha256 => m,
            _ => Self::fresh(config_path, config_sha256),
        }
    }

    fn save(&self, out_dir: &Path) -> Result<()> {
        io::write_json(out_dir.join(MANIFEST_FILE), self)
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn load_config(path: &Path) -> Result<(ExperimentConfig, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Config("configuration is not UTF-8".into()))?;
    let hash = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok((ExperimentConfig::from_json(&text)?, hash))
}

fn noise_spec(cfg: &ExperimentConfig, opts: &SimulateOptions) -> Result<NoiseSpec> {
    let spec = NoiseSpec {
        level: opts.noise.unwrap_or(cfg.noise_level),
        seed: opts.seed.unwrap_or(cfg.seed),
        mode: opts.noise_mode.unwrap_or(cfg.noise_mode),
    };
    if !(0.0..1.0).contains(&spec.level) {
        return Err(Error::Validation(vec![Violation::Dimension(format!(
            "noise level {} must lie in [0, 1)",
            spec.level
        ))]));
    }
    Ok(spec)
}

/// Generate a (noisy) tensor for a validated experiment.
pub fn synthesize(
    experiment: &Experiment,
    model: ForwardModel,
    quad_order: Option<usize>,
    noise: &NoiseSpec,
) -> Result<(FarFieldTensor, Option<f64>)> {
    let Experiment {
        ensemble,
        geometry,
        grid,
        ..
    } = experiment;
    let (clean, estimate) = match model {
        ForwardModel::Leading => (leading_order_farfield(ensemble, geometry, grid), None),
        ForwardModel::Born => {
            let r = born_farfield(
                ensemble,
                geometry,
                grid,
                quad_order.unwrap_or(DEFAULT_QUAD_ORDER),
            )?;
            (r.tensor, Some(r.error_estimate))
        }
    };
    Ok((add_noise(&clean, noise), estimate))
}

/// Outcome of [`simulate`].
#[derive(Clone, Debug)]
pub struct SimulateOutput {
    pub tensor: FarFieldTensor,
    pub metadata: TensorMetadata,
    pub tensor_path: PathBuf,
}

fn simulate_into(
    config_path: &Path,
    cfg: &ExperimentConfig,
    out_dir: &Path,
    opts: &SimulateOptions,
    manifest: &mut RunManifest,
) -> Result<SimulateOutput> {
    let started = unix_now();
    let experiment = cfg.validated()?;
    let noise = noise_spec(cfg, opts)?;
    let (tensor, estimate) = synthesize(&experiment, opts.model, opts.quad_order, &noise)?;
    let quad_order = match opts.model {
        ForwardModel::Born => Some(opts.quad_order.unwrap_or(DEFAULT_QUAD_ORDER)),
        ForwardModel::Leading => None,
    };
    let metadata = TensorMetadata {
        model: format!("{:?}", opts.model).to_lowercase(),
        quad_order,
        born_error_estimate: estimate,
        noise_level: noise.level,
        noise_mode: noise.mode,
        seed: noise.seed,
        rng_algorithm: RNG_ALGORITHM.into(),
        geometry_fingerprint: tensor.fingerprint.clone(),
        directions: tensor.directions(),
        frequencies: tensor.frequencies(),
    };
    let tensor_path = out_dir.join(TENSOR_FILE);
    let meta_path = out_dir.join(TENSOR_META_FILE);
    io::write_tensor_csv(&tensor_path, &tensor, &experiment.grid)?;
    io::write_json(&meta_path, &metadata)?;
    manifest.simulate = Some(SimulateRecord {
        started_unix: started,
        finished_unix: unix_now(),
        model: opts.model,
        quad_order,
        born_error_estimate: estimate,
        noise_level: noise.level,
        noise_mode: noise.mode,
        seed: noise.seed,
        outputs: vec![
            tensor_path.display().to_string(),
            meta_path.display().to_string(),
        ],
    });
    let _ = config_path;
    Ok(SimulateOutput {
        tensor,
        metadata,
        tensor_path,
    })
}

/// `simulate`: write `tensor.csv`, `tensor.meta.json` and the manifest.
pub fn simulate(
    config_path: &Path,
    out_dir: &Path,
    opts: &SimulateOptions,
) -> Result<SimulateOutput> {
    let (cfg, hash) = load_config(config_path)?;
    let mut manifest = RunManifest::load_or_new(out_dir, config_path, hash);
    let out = simulate_into(config_path, &cfg, out_dir, opts, &mut manifest)?;
    manifest.save(out_dir)?;
    Ok(out)
}

/// Outcome of [`reconstruct`].
#[derive(Clone, Debug)]
pub struct ReconstructOutput {
    pub field: IndicatorField,
    pub peaks: PeakSet,
    pub model_order: Option<ModelOrderEstimate>,
    pub record: ReconstructRecord,
}

/// Image an already loaded tensor. Pure computation; nothing is written.
pub fn image(
    experiment: &Experiment,
    tensor: &FarFieldTensor,
    opts: &ReconstructOptions,
) -> Result<(
    IndicatorField,
    PeakSet,
    Option<ModelOrderEstimate>,
    Vec<Vec<f64>>,
)> {
    let Experiment { geometry, grid, .. } = experiment;
    if opts.functional == Functional::I2 && opts.scatterers.is_none() && opts.mtilde != MTilde::Auto
    {
        return Err(Error::MissingScattererCount);
    }
    if tensor.directions() != geometry.num_directions() || tensor.frequencies() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "tensor is {}×{}, configuration expects {}×{}",
            tensor.directions(),
            tensor.frequencies(),
            geometry.num_directions(),
            grid.len()
        )));
    }
    let imaging = match &opts.grid_points {
        Some(p) => io::with_points(&experiment.imaging, p),
        None => experiment.imaging.clone(),
    };
    if imaging.points.len() != geometry.dimension || imaging.points.contains(&0) {
        return Err(Error::DimensionMismatch(format!(
            "grid needs {} positive node counts",
            geometry.dimension
        )));
    }
    let rescaled = rescale_data(tensor, grid, opts.variant);
    let svds = direction_svds(&rescaled, grid, opts.variant)?;
    let spectra: Vec<Vec<f64>> = svds.iter().map(|s| s.singular_values.clone()).collect();
    let (mtilde, estimate) = match opts.mtilde {
        MTilde::Fixed(m) => (m.clamp(1, grid.hankel_cols()), None),
        MTilde::Auto => {
            let est = estimate_model_order(
                &rescaled,
                grid,
                geometry,
                &imaging,
                opts.variant,
                &ModelOrderOptions {
                    threshold_fraction: opts.threshold_fraction,
                    min_separation: opts.min_separation,
                    ..opts.model_order
                },
            )?;
            (est.l_tilde, Some(est))
        }
    };
    let projectors = fixed_rank_projectors(&svds, mtilde)?;
    let eff = geometry.effective_directions();
    let field = match opts.functional {
        Functional::I1 => indicator_i1(&imaging, &projectors, &eff, grid.k_min)?,
        Functional::I2 => {
            let m = opts
                .scatterers
                .or(estimate.as_ref().map(|e| e.m_estimate.max(1)))
                .ok_or(Error::MissingScattererCount)?;
            let needed = i2_selection_size(geometry.dimension, m);
            if needed > eff.len() {
                return Err(Error::InsufficientDirections {
                    required: needed,
                    available: eff.len(),
                });
            }
            indicator_i2(
                &imaging,
                &projectors,
                &eff,
                grid.k_min,
                m,
                geometry.dimension,
            )?
        }
    };
    let peaks = extract_peaks(&field, opts.threshold_fraction, opts.min_separation);
    Ok((field, peaks, estimate, spectra))
}

fn reconstruct_into(
    tensor_path: &Path,
    cfg: &ExperimentConfig,
    out_dir: &Path,
    opts: &ReconstructOptions,
    manifest: &mut RunManifest,
) -> Result<ReconstructOutput> {
    let started = unix_now();
    let experiment = cfg.validated()?;
    let mut tensor = io::read_tensor_csv(tensor_path)?;
    tensor.fingerprint = geometry_fingerprint(&experiment.geometry, &experiment.grid);
    let (field, peaks, model_order, spectra) = image(&experiment, &tensor, opts)?;

    let mut outputs = Vec::new();
    if matches!(opts.out_format, OutFormat::Csv | OutFormat::Both) {
        let p = out_dir.join(FIELD_CSV_FILE);
        io::write_field_csv(&p, &field)?;
        outputs.push(p);
    }
    if matches!(opts.out_format, OutFormat::Vtk | OutFormat::Both) {
        let p = out_dir.join(FIELD_VTK_FILE);
        io::write_field_vtk(&p, &field)?;
        outputs.push(p);
    }
    let peaks_path = out_dir.join(PEAKS_FILE);
    io::write_peaks_json(&peaks_path, &peaks)?;
    outputs.push(peaks_path);
    let sv_path = out_dir.join(SV_FILE);
    let svds = direction_svds(
        &rescale_data(&tensor, &experiment.grid, opts.variant),
        &experiment.grid,
        opts.variant,
    )?;
    io::write_sv_dump(&sv_path, &svds)?;
    outputs.push(sv_path);

    let record = ReconstructRecord {
        started_unix: started,
        finished_unix: unix_now(),
        tensor: tensor_path.display().to_string(),
        functional: field.functional,
        variant: opts.variant,
        mtilde: field.mtilde,
        scatterers: field.m_used,
        model_order: model_order.clone(),
        grid_points: field.grid.points.clone(),
        threshold_fraction: opts.threshold_fraction,
        min_separation: opts.min_separation,
        peaks: peaks.len(),
        singular_values: spectra,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    manifest.reconstruct = Some(record.clone());
    Ok(ReconstructOutput {
        field,
        peaks,
        model_order,
        record,
    })
}

/// `reconstruct`: image a tensor CSV and write field, peaks, singular
/// values and the manifest.
pub fn reconstruct(
    tensor_path: &Path,
    config_path: &Path,
    out_dir: &Path,
    opts: &ReconstructOptions,
) -> Result<ReconstructOutput> {
    let (cfg, hash) = load_config(config_path)?;
    let mut manifest = RunManifest::load_or_new(out_dir, config_path, hash);
    let out = reconstruct_into(tensor_path, &cfg, out_dir, opts, &mut manifest)?;
    manifest.save(out_dir)?;
    Ok(out)
}

/// `pipeline`: simulate, then reconstruct from the written tensor, with a
/// single manifest.
pub fn run_pipeline(
    config_path: &Path,
    out_dir: &Path,
    sim: &SimulateOptions,
    rec: &ReconstructOptions,
) -> Result<(SimulateOutput, ReconstructOutput)> {
    let (cfg, hash) = load_config(config_path)?;
    // fail fast before simulating
    if rec.functional == Functional::I2 && rec.scatterers.is_none() && rec.mtilde != MTilde::Auto {
        return Err(Error::MissingScattererCount);
    }
    let mut manifest = RunManifest::fresh(config_path, hash);
    let s = simulate_into(config_path, &cfg, out_dir, sim, &mut manifest)?;
    let r = reconstruct_into(&s.tensor_path, &cfg, out_dir, rec, &mut manifest)?;
    manifest.save(out_dir)?;
    Ok((s, r))
}

/// `sv-dump`: singular values of every direction's Hankel matrix.
pub fn sv_dump(
    tensor_path: &Path,
    config_path: &Path,
    out_path: &Path,
    variant: DataVariant,
) -> Result<Vec<Vec<f64>>> {
    let (cfg, _) = load_config(config_path)?;
    let experiment = cfg.validated()?;
    let tensor = io::read_tensor_csv(tensor_path)?;
    let grid = &experiment.grid;
    if tensor.directions() != experiment.geometry.num_directions()
        || tensor.frequencies() != grid.len()
    {
        return Err(Error::DimensionMismatch(format!(
            "tensor is {}×{}, configuration expects {}×{}",
            tensor.directions(),
            tensor.frequencies(),
            experiment.geometry.num_directions(),
            grid.len()
        )));
    }
    let svds = direction_svds(&rescale_data(&tensor, grid, variant), grid, variant)?;
    io::write_sv_dump(out_path, &svds)?;
    Ok(svds.into_iter().map(|s| s.singular_values).collect())
}
