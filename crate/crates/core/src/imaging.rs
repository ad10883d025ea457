//! MUSIC imaging: test vectors, subspace residuals, the indicator
//! functionals `I1` (all directions) and `I2` (the `(d-1)M+1` best
//! directions per point), peak extraction and model-order estimation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::DataVariant;
use crate::model::{distance, dot, AcquisitionGeometry, FrequencyGrid, ImagingGrid};
use crate::spectral::{hankel_matrices, svd, SubspaceProjector, Svd};

/// Test vector `[1, ζ, ζ², …, ζ^(len-1)]` with `ζ = exp(i k_min e·z)`.
pub fn test_vector(
    z: &[f64],
    effective_direction: &[f64],
    k_min: f64,
    len: usize,
) -> Vec<Complex64> {
    let zeta = Complex64::from_polar(1.0, k_min * dot(effective_direction, z));
    let mut out = Vec::with_capacity(len);
    let mut pow = Complex64::new(1.0, 0.0);
    for _ in 0..len {
        out.push(pow);
        pow *= zeta;
    }
    out
}

/// `‖(I - P) φ‖₂`.
pub fn residual(projector: &SubspaceProjector, phi: &[Complex64]) -> Result<f64> {
    if phi.len() != projector.dim() {
        return Err(Error::DimensionMismatch(format!(
            "test vector has length {}, projector acts on length {}",
            phi.len(),
            projector.dim()
        )));
    }
    Ok(projector.rejection_norm(phi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    I1,
    I2,
}

/// Samples of an imaging functional on a grid, first axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorField {
    pub grid: ImagingGrid,
    pub values: Vec<f64>,
    pub functional: Functional,
    /// Largest projector rank used.
    pub mtilde: usize,
    /// Scatterer count behind the `I2` selection.
    pub m_used: Option<usize>,
}

impl IndicatorField {
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index and value of the largest sample (first one on ties).
    pub fn argmax(&self) -> (usize, f64) {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            })
    }
}

/// Residual floor that keeps indicators finite at exact hits.
pub fn residual_floor(vector_len: usize, directions: usize) -> f64 {
    1e-12 * (vector_len as f64).sqrt() * directions as f64
}

fn check_inputs(
    grid: &ImagingGrid,
    projectors: &[SubspaceProjector],
    effective_directions: &[Vec<f64>],
) -> Result<usize> {
    if projectors.is_empty() {
        return Err(Error::DimensionMismatch(
            "no directions to image with".into(),
        ));
    }
    if projectors.len() != effective_directions.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} projectors for {} directions",
            projectors.len(),
            effective_directions.len()
        )));
    }
    let len = projectors[0].dim();
    if projectors.iter().any(|p| p.dim() != len) {
        return Err(Error::DimensionMismatch(
            "projectors act on different lengths".into(),
        ));
    }
    if effective_directions
        .iter()
        .any(|e| e.len() != grid.dimension())
    {
        return Err(Error::DimensionMismatch(
            "effective directions and imaging grid differ in dimension".into(),
        ));
    }
    Ok(len)
}

/// Residuals of every direction at every grid node, node-major.
fn residual_table(
    grid: &ImagingGrid,
    projectors: &[SubspaceProjector],
    effective_directions: &[Vec<f64>],
    k_min: f64,
    len: usize,
) -> Vec<Vec<f64>> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let z = grid.node(i);
            projectors
                .iter()
                .zip(effective_directions)
                .map(|(p, e)| p.rejection_norm(&test_vector(&z, e, k_min, len)))
                .collect()
        })
        .collect()
}

fn max_rank(projectors: &[SubspaceProjector]) -> usize {
    projectors.iter().map(|p| p.rank()).max().unwrap_or(0)
}

/// `I1(z) = 1 / max(Σ_j ‖(I - P_j) φ_z^(j)‖, floor)`.
pub fn indicator_i1(
    grid: &ImagingGrid,
    projectors: &[SubspaceProjector],
    effective_directions: &[Vec<f64>],
    k_min: f64,
) -> Result<IndicatorField> {
    let len = check_inputs(grid, projectors, effective_directions)?;
    let floor = residual_floor(len, projectors.len());
    let values = residual_table(grid, projectors, effective_directions, k_min, len)
        .into_iter()
        .map(|r| 1.0 / r.iter().sum::<f64>().max(floor))
        .collect();
    Ok(IndicatorField {
        grid: grid.clone(),
        values,
        functional: Functional::I1,
        mtilde: max_rank(projectors),
        m_used: None,
    })
}

/// Number of directions summed by `I2`, `(d - 1) M + 1`.
pub fn i2_selection_size(dimension: usize, scatterers: usize) -> usize {
    (dimension - 1) * scatterers + 1
}

/// `I2(z)`: like `I1` but summing only the `(d-1)M+1` smallest residuals
/// at each point. Ties at the selection boundary go to the lower direction
/// index.
pub fn indicator_i2(
    grid: &ImagingGrid,
    projectors: &[SubspaceProjector],
    effective_directions: &[Vec<f64>],
    k_min: f64,
    scatterers: usize,
    dimension: usize,
) -> Result<IndicatorField> {
    let len = check_inputs(grid, projectors, effective_directions)?;
    let keep = i2_selection_size(dimension, scatterers);
    if keep > projectors.len() {
        return Err(Error::InsufficientDirections {
            required: keep,
            available: projectors.len(),
        });
    }
    let floor = residual_floor(len, projectors.len());
    let values = residual_table(grid, projectors, effective_directions, k_min, len)
        .into_iter()
        .map(|mut r| {
            // stable: equal residuals keep direction order
            r.sort_by(|a, b| a.total_cmp(b));
            1.0 / r[..keep].iter().sum::<f64>().max(floor)
        })
        .collect();
    Ok(IndicatorField {
        grid: grid.clone(),
        values,
        functional: Functional::I2,
        mtilde: max_rank(projectors),
        m_used: Some(scatterers),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub position: Vec<f64>,
    pub value: f64,
    #[serde(skip)]
    pub node: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeakSet {
    /// Descending by value.
    pub peaks: Vec<Peak>,
    pub threshold_fraction: f64,
    pub min_separation: f64,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    /// Distance from `target` to the closest peak.
    pub fn distance_to(&self, target: &[f64]) -> f64 {
        self.peaks
            .iter()
            .map(|p| distance(&p.position, target))
            .fold(f64::INFINITY, f64::min)
    }
}

fn neighbor_offsets(dimension: usize) -> Vec<Vec<isize>> {
    let mut out = vec![vec![]];
    for _ in 0..dimension {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1..=1).map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&o| o != 0));
    out
}

/// Local maxima over the full `3^d - 1` neighborhood that reach
/// `threshold_fraction` of the global maximum, thinned greedily so that
/// kept peaks are at least `min_separation` apart.
///
/// On a plateau only the node with the smallest linear index (first axis
/// fastest) counts as a maximum.
pub fn extract_peaks(
    field: &IndicatorField,
    threshold_fraction: f64,
    min_separation: f64,
) -> PeakSet {
    let grid = &field.grid;
    let offsets = neighbor_offsets(grid.dimension());
    let cutoff = threshold_fraction * field.max();
    let mut candidates: Vec<(usize, f64)> = Vec::new();
    for (i, &v) in field.values.iter().enumerate() {
        if v < cutoff {
            continue;
        }
        let idx = grid.multi_index(i);
        let is_max = offsets.iter().all(|off| {
            let mut nb = Vec::with_capacity(idx.len());
            for ((&c, &o), &n) in idx.iter().zip(off).zip(&grid.points) {
                let t = c as isize + o;
                if t < 0 || t >= n as isize {
                    return true;
                }
                nb.push(t as usize);
            }
            let k = grid.linear_index(&nb);
            let w = field.values[k];
            if k < i {
                v > w
            } else {
                v >= w
            }
        });
        if is_max {
            candidates.push((i, v));
        }
    }
    // stable sort keeps index order among equal values
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut peaks: Vec<Peak> = Vec::new();
    for (node, value) in candidates {
        let position = grid.node(node);
        if peaks
            .iter()
            .all(|p| distance(&p.position, &position) >= min_separation)
        {
            peaks.push(Peak {
                position,
                value,
                node,
            });
        }
    }
    PeakSet {
        peaks,
        threshold_fraction,
        min_separation,
    }
}

/// Per-direction SVDs of the Hankel matrices of rescaled data.
pub fn direction_svds(
    rescaled: &DMatrix<Complex64>,
    grid: &FrequencyGrid,
    variant: DataVariant,
) -> Result<Vec<Svd>> {
    hankel_matrices(rescaled, grid, variant)?
        .par_iter()
        .map(|h| svd(&h.entries))
        .collect()
}

/// Projectors of rank `rank` (clamped to each matrix) for every direction.
pub fn fixed_rank_projectors(svds: &[Svd], rank: usize) -> Result<Vec<SubspaceProjector>> {
    svds.iter()
        .map(|s| SubspaceProjector::from_svd(s, rank.clamp(1, s.u.ncols())))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelOrderOptions {
    /// Largest projector rank tried.
    pub mtilde_max: usize,
    /// Consecutive ranks that must agree on the peak count.
    pub stationarity_window: usize,
    pub threshold_fraction: f64,
    pub min_separation: f64,
    /// Rerun `I2` with the estimated `M` and `L̃` and record its peak count.
    pub confirm_with_i2: bool,
}

impl Default for ModelOrderOptions {
    fn default() -> Self {
        ModelOrderOptions {
            mtilde_max: 16,
            stationarity_window: 2,
            threshold_fraction: 0.5,
            min_separation: 1.0,
            confirm_with_i2: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelOrderEstimate {
    /// Estimated number of scatterers `M`.
    pub m_estimate: usize,
    /// First projector rank at which the estimate appeared, `L̃`.
    pub l_tilde: usize,
    /// `(M̃, peak count)` for every rank tried.
    pub trajectory: Vec<(usize, usize)>,
    /// False when `mtilde_max` was reached without a stable count; the
    /// estimate is then the last count seen.
    pub stationary: bool,
    pub i2_peak_count: Option<usize>,
}

/// Increase the projector rank from 1 and count `I1` peaks until the count
/// is the same for `stationarity_window` consecutive ranks.
pub fn estimate_model_order(
    rescaled: &DMatrix<Complex64>,
    grid: &FrequencyGrid,
    geometry: &AcquisitionGeometry,
    imaging_grid: &ImagingGrid,
    variant: DataVariant,
    options: &ModelOrderOptions,
) -> Result<ModelOrderEstimate> {
    let svds = direction_svds(rescaled, grid, variant)?;
    let eff = geometry.effective_directions();
    let max = options.mtilde_max.clamp(1, grid.hankel_cols());
    let window = options.stationarity_window.max(1);
    let mut trajectory = Vec::new();
    let mut found = None;
    for mtilde in 1..=max {
        let projectors = fixed_rank_projectors(&svds, mtilde)?;
        let field = indicator_i1(imaging_grid, &projectors, &eff, grid.k_min)?;
        let count = extract_peaks(&field, options.threshold_fraction, options.min_separation).len();
        trajectory.push((mtilde, count));
        if trajectory.len() >= window {
            let tail = &trajectory[trajectory.len() - window..];
            if tail.iter().all(|&(_, c)| c == count) {
                found = Some((count, tail[0].0));
                break;
            }
        }
    }
    let stationary = found.is_some();
    let (m_estimate, l_tilde) = found.unwrap_or_else(|| {
        let &(m, c) = trajectory.last().expect("at least one rank tried");
        (c, m)
    });
    let i2_peak_count = if options.confirm_with_i2 {
        let keep = i2_selection_size(geometry.dimension, m_estimate.max(1));
        if keep <= eff.len() {
            let projectors = fixed_rank_projectors(&svds, l_tilde)?;
            let field = indicator_i2(
                imaging_grid,
                &projectors,
                &eff,
                grid.k_min,
                m_estimate.max(1),
                geometry.dimension,
            )?;
            Some(extract_peaks(&field, options.threshold_fraction, options.min_separation).len())
        } else {
            None
        }
    } else {
        None
    };
    Ok(ModelOrderEstimate {
        m_estimate,
        l_tilde,
        trajectory,
        stationary,
        i2_peak_count,
    })
}
