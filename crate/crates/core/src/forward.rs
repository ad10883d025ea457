//! Synthetic far-field data.
//!
//! The primary model is the leading term of the small-scatterer asymptotics,
//!
//! ```text
//! u∞(x̂_j, θ; k_n) = k_n² Σ_m (μ1_m + i μ2_m / k_n) exp(i k_n e_j·z_m),
//! ```
//!
//! with `μ` the physical contrast moments. [`born_farfield`] evaluates the
//! weak-scattering volume integral over ellipsoidal supports by quadrature;
//! it agrees with the leading term up to `O(k ε)` and is the stand-in for a
//! full-wave solver.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    dot, geometry_fingerprint, AcquisitionGeometry, FarFieldTensor, FrequencyGrid,
    ScattererEnsemble,
};
use crate::quadrature::gauss_legendre;

/// Name of the generator behind [`add_noise`], recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9)";

/// Default points per coordinate for [`born_farfield`].
pub const DEFAULT_QUAD_ORDER: usize = 12;

/// Leading-order far field of every scatterer, exact sum without remainder.
pub fn leading_order_farfield(
    ensemble: &ScattererEnsemble,
    geometry: &AcquisitionGeometry,
    grid: &FrequencyGrid,
) -> FarFieldTensor {
    let eff = geometry.effective_directions();
    let ks = grid.wavenumbers();
    let rows: Vec<Vec<Complex64>> = eff
        .par_iter()
        .map(|e| {
            let phases: Vec<f64> = ensemble
                .scatterers
                .iter()
                .map(|s| dot(e, &s.position))
                .collect();
            ks.iter()
                .map(|&k| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (s, &p) in ensemble.scatterers.iter().zip(&phases) {
                        let coef = Complex64::new(s.moment_q1, s.moment_q2 / k);
                        acc += coef * Complex64::from_polar(1.0, k * p);
                    }
                    acc * (k * k)
                })
                .collect()
        })
        .collect();
    FarFieldTensor {
        values: from_rows(&rows, ks.len()),
        fingerprint: geometry_fingerprint(geometry, grid),
    }
}

fn from_rows(rows: &[Vec<Complex64>], ncols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows.len(), ncols, |j, n| rows[j][n])
}

/// Result of [`born_farfield`].
#[derive(Clone, Debug)]
pub struct BornResult {
    pub tensor: FarFieldTensor,
    /// Largest entrywise change against the rule with half as many points
    /// per coordinate, plus a rounding floor.
    pub error_estimate: f64,
}

/// Quadrature rule on the unit ball in polar/spherical coordinates: nodes
/// and weights including the Jacobian.
fn unit_ball_rule(dimension: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    let (x, w) = gauss_legendre(order);
    // map [-1, 1] to [0, 1] for the radius; periodic trapezoid in azimuth
    let radial: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&t, &wt)| (0.5 * (t + 1.0), 0.5 * wt))
        .collect();
    let m = 2 * order;
    let step = 2.0 * std::f64::consts::PI / m as f64;
    let azimuth: Vec<(f64, f64)> = (0..m).map(|i| (i as f64 * step, step)).collect();
    let mut out = Vec::new();
    match dimension {
        2 => {
            for &(r, wr) in &radial {
                for &(phi, wp) in &azimuth {
                    out.push((vec![r * phi.cos(), r * phi.sin()], wr * wp * r));
                }
            }
        }
        3 => {
            for &(r, wr) in &radial {
                for (&c, &wc) in x.iter().zip(&w) {
                    let s = (1.0 - c * c).sqrt();
                    for &(phi, wp) in &azimuth {
                        out.push((
                            vec![r * s * phi.cos(), r * s * phi.sin(), r * c],
                            wr * wc * wp * r * r,
                        ));
                    }
                }
            }
        }
        d => panic!("unsupported dimension {d}"),
    }
    out
}

fn born_values(
    ensemble: &ScattererEnsemble,
    geometry: &AcquisitionGeometry,
    grid: &FrequencyGrid,
    order: usize,
) -> DMatrix<Complex64> {
    let rule = unit_ball_rule(geometry.dimension, order);
    let eff = geometry.effective_directions();
    let ks = grid.wavenumbers();
    let rows: Vec<Vec<Complex64>> = eff
        .par_iter()
        .map(|e| {
            let mut row = vec![Complex64::new(0.0, 0.0); ks.len()];
            for s in &ensemble.scatterers {
                let shape = s.shape.as_ref().expect("shapes checked by caller");
                let jac: f64 = shape.semiaxes.iter().product();
                let base = dot(e, &s.position);
                // e·y for every quadrature node y = z + diag(a) η
                let phases: Vec<(f64, f64)> = rule
                    .iter()
                    .map(|(eta, w)| {
                        let off: f64 = eta
                            .iter()
                            .zip(&shape.semiaxes)
                            .zip(e)
                            .map(|((h, a), ei)| h * a * ei)
                            .sum();
                        (base + off, w * jac)
                    })
                    .collect();
                for (slot, &k) in row.iter_mut().zip(&ks) {
                    let integral: Complex64 = phases
                        .iter()
                        .map(|&(p, w)| Complex64::from_polar(w, k * p))
                        .sum();
                    *slot += Complex64::new(shape.q1, shape.q2 / k) * integral * (k * k);
                }
            }
            row
        })
        .collect();
    from_rows(&rows, ks.len())
}

/// Weak-scattering (Born) far field of ellipsoidal scatterers with constant
/// contrast, by tensor-product Gauss–Legendre quadrature of the unit ball
/// mapped affinely onto each ellipsoid.
pub fn born_farfield(
    ensemble: &ScattererEnsemble,
    geometry: &AcquisitionGeometry,
    grid: &FrequencyGrid,
    quad_order: usize,
) -> Result<BornResult> {
    if let Some(index) = ensemble.scatterers.iter().position(|s| s.shape.is_none()) {
        return Err(Error::MissingShape { index });
    }
    let quad_order = quad_order.max(2);
    let values = born_values(ensemble, geometry, grid, quad_order);
    let coarse = born_values(ensemble, geometry, grid, quad_order.div_ceil(2));
    let k_max = grid.k_max();
    let scale: f64 = ensemble
        .scatterers
        .iter()
        .map(|s| k_max * k_max * (s.moment_q1.abs() + s.moment_q2.abs() / grid.k_min))
        .sum();
    let diff = values
        .iter()
        .zip(coarse.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(BornResult {
        tensor: FarFieldTensor {
            values,
            fingerprint: geometry_fingerprint(geometry, grid),
        },
        error_estimate: diff + 64.0 * f64::EPSILON * scale,
    })
}

/// How noise is scaled against the clean data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// `U + E` with `‖E‖_F = δ ‖U‖_F`.
    #[default]
    Global,
    /// `U_jn (1 + δ (a + i b))` per entry.
    Entrywise,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Relative level `δ`.
    pub level: f64,
    pub seed: u64,
    pub mode: NoiseMode,
}

impl NoiseSpec {
    pub fn new(level: f64, seed: u64) -> Self {
        NoiseSpec {
            level,
            seed,
            mode: NoiseMode::Global,
        }
    }

    pub fn entrywise(level: f64, seed: u64) -> Self {
        NoiseSpec {
            level,
            seed,
            mode: NoiseMode::Entrywise,
        }
    }
}

/// Perturb a tensor with uniform complex noise: real and imaginary parts
/// are i.i.d. on `[-1, 1]`, drawn row by row from one seeded stream.
pub fn add_noise(tensor: &FarFieldTensor, noise: &NoiseSpec) -> FarFieldTensor {
    if noise.level == 0.0 {
        return tensor.clone();
    }
    let mut rng = ChaCha20Rng::seed_from_u64(noise.seed);
    let (rows, cols) = tensor.values.shape();
    let mut raw = DMatrix::<Complex64>::zeros(rows, cols);
    for j in 0..rows {
        for n in 0..cols {
            let a: f64 = rng.random_range(-1.0..=1.0);
            let b: f64 = rng.random_range(-1.0..=1.0);
            raw[(j, n)] = Complex64::new(a, b);
        }
    }
    let values = match noise.mode {
        NoiseMode::Global => {
            let e_norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let scale = noise.level * tensor.frobenius_norm() / e_norm;
            &tensor.values + raw * Complex64::new(scale, 0.0)
        }
        NoiseMode::Entrywise => tensor.values.zip_map(&raw, |u, e| {
            u * (Complex64::new(1.0, 0.0) + e * noise.level)
        }),
    };
    FarFieldTensor {
        values,
        fingerprint: tensor.fingerprint.clone(),
    }
}

/// Normalization applied to each wavenumber column before Hankel assembly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataVariant {
    /// Divide by `k_n`: samples of `Σ (k_n μ1 + i μ2) exp(i k_n e·z)`.
    #[default]
    Extended,
    /// Divide by `k_n²`: samples of `Σ μ1 exp(i k_n e·z)` for
    /// non-absorbing scatterers.
    RealOnly,
}

/// Divide column `n` by `k_n` or `k_n²`.
pub fn rescale_data(
    tensor: &FarFieldTensor,
    grid: &FrequencyGrid,
    variant: DataVariant,
) -> DMatrix<Complex64> {
    let mut out = tensor.values.clone();
    for (n, mut col) in out.column_iter_mut().enumerate() {
        let k = grid.wavenumber(n + 1);
        let div = match variant {
            DataVariant::Extended => k,
            DataVariant::RealOnly => k * k,
        };
        col.iter_mut().for_each(|c| *c /= div);
    }
    out
}
