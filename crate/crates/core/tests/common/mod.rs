#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use mfmusic::{AcquisitionGeometry, AcquisitionMode, FrequencyGrid, Scatterer, ScattererEnsemble};

pub struct Case {
    pub ensemble: ScattererEnsemble,
    pub geometry: AcquisitionGeometry,
    pub grid: FrequencyGrid,
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (0.1..=1.0).contains(&n) {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

pub fn point_in_ball(rng: &mut impl Rng, d: usize, r: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-r..r)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() < r * r {
            return v;
        }
    }
}

/// Smallest wrapped distance between the phases `k_min e·z_m` over all
/// pairs.
pub fn pair_separation(e: &[f64], positions: &[Vec<f64>], k_min: f64) -> f64 {
    separations(e, positions, k_min).fold(f64::INFINITY, f64::min)
}

/// As [`pair_separation`], ignoring pairs that coincide exactly.
pub fn phase_separation(e: &[f64], positions: &[Vec<f64>], k_min: f64) -> f64 {
    separations(e, positions, k_min)
        .filter(|&t| t > 1e-9)
        .fold(f64::INFINITY, f64::min)
}

fn separations<'a>(
    e: &'a [f64],
    positions: &'a [Vec<f64>],
    k_min: f64,
) -> impl Iterator<Item = f64> + 'a {
    (0..positions.len()).flat_map(move |a| {
        (a + 1..positions.len()).map(move |b| {
            let p: f64 = e
                .iter()
                .zip(&positions[a])
                .zip(&positions[b])
                .map(|((u, v), w)| u * (v - w))
                .sum();
            let t = (k_min * p).rem_euclid(2.0 * PI);
            t.min(2.0 * PI - t)
        })
    })
}

/// Smallest phase separation every direction of [`random_case`] keeps.
pub const MIN_PHASE_SEPARATION: f64 = 0.3;

fn effective(mode: AcquisitionMode, theta: &[f64], x: &[f64]) -> Vec<f64> {
    match mode {
        AcquisitionMode::FixedIncidence => theta.iter().zip(x).map(|(t, v)| t - v).collect(),
        AcquisitionMode::Backscattering => x.iter().map(|v| 2.0 * v).collect(),
    }
}

/// Random admissible experiment: `M ≤ 4` point scatterers, `d ∈ {2, 3}`,
/// `N ∈ {8, 16}` with `L = 2M`. Receiver directions are drawn until each
/// one separates the projected positions by [`MIN_PHASE_SEPARATION`].
/// Every fourth case forces two scatterers to share their projection on the
/// first direction; every fifth has a pure absorber.
pub fn random_case(rng: &mut impl Rng, index: usize) -> Case {
    let d = rng.random_range(2..=3);
    let m = rng.random_range(1..=4usize);
    let l = 2 * m;
    let n = if l >= 8 {
        16
    } else {
        [8, 16][rng.random_range(0..2)]
    };
    let r = 1.0;
    let k_min = PI / (2.0 * r);
    let mode = if rng.random_bool(0.5) {
        AcquisitionMode::FixedIncidence
    } else {
        AcquisitionMode::Backscattering
    };
    let theta = match mode {
        AcquisitionMode::FixedIncidence => unit_vector(rng, d),
        AcquisitionMode::Backscattering => vec![0.0; d],
    };
    let j = (d - 1) * m + 1 + rng.random_range(0..3);

    let (receivers, positions) = 'draw: loop {
        let x = unit_vector(rng, d);
        let e = effective(mode, &theta, &x);
        let mut positions: Vec<Vec<f64>> = (0..m).map(|_| point_in_ball(rng, d, 0.5 * r)).collect();
        if index % 4 == 3 && m >= 2 {
            // move z_2 by 0.45 within the plane through z_1 orthogonal to e_1
            let ee: f64 = e.iter().map(|v| v * v).sum();
            let w = unit_vector(rng, d);
            let we: f64 = w.iter().zip(&e).map(|(a, b)| a * b).sum();
            let t: Vec<f64> = w.iter().zip(&e).map(|(wi, ei)| wi - we / ee * ei).collect();
            let tn = t.iter().map(|v| v * v).sum::<f64>().sqrt();
            if tn < 1e-3 {
                continue;
            }
            positions[1] = positions[0]
                .iter()
                .zip(&t)
                .map(|(p, ti)| p + 0.45 * ti / tn)
                .collect();
        }
        if phase_separation(&e, &positions, k_min) < MIN_PHASE_SEPARATION {
            continue;
        }
        let mut receivers = vec![x];
        let mut attempts = 0;
        while receivers.len() < j {
            attempts += 1;
            if attempts > 10_000 {
                continue 'draw;
            }
            let x = unit_vector(rng, d);
            // exact coincidences are reserved for the first direction
            if pair_separation(&effective(mode, &theta, &x), &positions, k_min)
                >= MIN_PHASE_SEPARATION
            {
                receivers.push(x);
            }
        }
        break (receivers, positions);
    };
    let geometry = AcquisitionGeometry {
        dimension: d,
        incident_direction: theta,
        receiver_directions: receivers,
        mode,
    };
    let scatterers = positions
        .into_iter()
        .enumerate()
        .map(|(i, z)| {
            let q1 = if index % 5 == 4 && i == 0 {
                0.0
            } else {
                rng.random_range(0.2..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }
            };
            Scatterer::point(z, 1e-2 * q1, 1e-2 * rng.random_range(0.0..1.0))
        })
        .collect();
    Case {
        ensemble: ScattererEnsemble::new(scatterers, r),
        geometry,
        grid: FrequencyGrid::new(k_min, n, l),
    }
}

/// Leading-order far field written out term by term.
pub fn oracle_farfield(
    ensemble: &ScattererEnsemble,
    geometry: &AcquisitionGeometry,
    grid: &FrequencyGrid,
) -> DMatrix<Complex64> {
    let d = geometry.dimension;
    let eff: Vec<Vec<f64>> = geometry
        .receiver_directions
        .iter()
        .map(|x| match geometry.mode {
            AcquisitionMode::FixedIncidence => (0..d)
                .map(|i| geometry.incident_direction[i] - x[i])
                .collect(),
            AcquisitionMode::Backscattering => x.iter().map(|v| 2.0 * v).collect(),
        })
        .collect();
    DMatrix::from_fn(eff.len(), 2 * grid.n, |j, col| {
        let k = (col + 1) as f64 * grid.k_min;
        ensemble
            .scatterers
            .iter()
            .map(|s| {
                let phase: f64 = eff[j]
                    .iter()
                    .zip(&s.position)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    * k;
                Complex64::new(s.moment_q1, s.moment_q2 / k)
                    * k
                    * k
                    * Complex64::new(phase.cos(), phase.sin())
            })
            .sum()
    })
}

/// Singular values by Hermitian eigen-decomposition of `AᴴA`, independent
/// of the library's SVD path.
pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    let g = a.adjoint() * a;
    g.symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, &x| m.max(x))
        .max(0.0)
        .sqrt()
}
