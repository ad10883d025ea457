//! Hankel matrices of the rescaled data, their singular value
//! decompositions, signal-subspace projectors, and the exact confluent
//! Vandermonde factorization of noise-free Hankel matrices.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::DataVariant;
use crate::model::{dot, AcquisitionGeometry, FrequencyGrid, ScattererEnsemble};

/// Exponents `e_j·z` closer than this are merged.
pub const COLLAPSE_TOL: f64 = 1e-12;
/// Merged coefficients below this magnitude count as cancelled.
pub const CANCEL_TOL: f64 = 1e-14;
/// Default ratio for [`RankStrategy::Gap`].
pub const DEFAULT_GAP_RATIO: f64 = 1e-2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Hankel matrix of one direction's rescaled data,
/// `entries[(p, q)] = row[p + q]`, of shape `(2N - L) × (L + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelMatrix {
    pub entries: DMatrix<Complex64>,
    pub direction: usize,
    pub variant: DataVariant,
}

/// Assemble the `(2N - L) × (L + 1)` Hankel matrix of a length-`2N` row.
pub fn assemble_hankel(row: &[Complex64], grid: &FrequencyGrid) -> Result<DMatrix<Complex64>> {
    if row.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "data row has {} samples, expected 2N = {}",
            row.len(),
            grid.len()
        )));
    }
    if grid.len() <= grid.l + 1 {
        return Err(Error::DimensionMismatch(format!(
            "2N = {} must exceed L + 1 = {}",
            grid.len(),
            grid.l + 1
        )));
    }
    let (rows, cols) = (grid.hankel_rows(), grid.hankel_cols());
    Ok(DMatrix::from_fn(rows, cols, |p, q| row[p + q]))
}

/// Hankel matrices of every direction of a rescaled `J × 2N` data matrix.
pub fn hankel_matrices(
    rescaled: &DMatrix<Complex64>,
    grid: &FrequencyGrid,
    variant: DataVariant,
) -> Result<Vec<HankelMatrix>> {
    (0..rescaled.nrows())
        .map(|j| {
            let row: Vec<Complex64> = rescaled.row(j).iter().copied().collect();
            Ok(HankelMatrix {
                entries: assemble_hankel(&row, grid)?,
                direction: j,
                variant,
            })
        })
        .collect()
}

/// Thin singular value decomposition `A = U diag(σ) Vᴴ`, with `σ`
/// non-increasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<Complex64>,
    pub singular_values: Vec<f64>,
    /// `Vᴴ`, one right singular vector (conjugated) per row.
    pub v_t: DMatrix<Complex64>,
}

impl Svd {
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let mut us = self.u.clone();
        for (mut col, &s) in us.column_iter_mut().zip(&self.singular_values) {
            col *= Complex64::new(s, 0.0);
        }
        us * &self.v_t
    }
}

pub fn svd(matrix: &DMatrix<Complex64>) -> Result<Svd> {
    if matrix
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(Error::DimensionMismatch(
            "matrix has non-finite entries".into(),
        ));
    }
    let raw = SVD::try_new(matrix.clone(), true, true, f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure)?;
    let (u, v_t) = match (raw.u, raw.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::ConvergenceFailure),
    };
    let mut order: Vec<usize> = (0..raw.singular_values.len()).collect();
    order.sort_by(|&a, &b| raw.singular_values[b].total_cmp(&raw.singular_values[a]));
    Ok(Svd {
        u: DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]),
        singular_values: order.iter().map(|&i| raw.singular_values[i]).collect(),
        v_t: DMatrix::from_fn(order.len(), v_t.ncols(), |r, c| v_t[(order[r], c)]),
    })
}

/// One exponent surviving the collapse of coinciding projections.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollapsedTerm {
    /// `e_j·z` shared by the merged scatterers.
    pub exponent: f64,
    /// Summed `μ1` of the merged scatterers.
    pub q1: f64,
    /// Summed `μ2` of the merged scatterers.
    pub q2: f64,
}

impl CollapsedTerm {
    pub fn is_confluent(&self) -> bool {
        self.q1.abs() >= CANCEL_TOL
    }
}

/// Merge scatterers whose projections onto `effective_direction` coincide
/// and drop exponents whose merged coefficients cancel.
pub fn collapse_exponents(
    ensemble: &ScattererEnsemble,
    effective_direction: &[f64],
) -> Vec<CollapsedTerm> {
    let mut raw: Vec<CollapsedTerm> = ensemble
        .scatterers
        .iter()
        .map(|s| CollapsedTerm {
            exponent: dot(effective_direction, &s.position),
            q1: s.moment_q1,
            q2: s.moment_q2,
        })
        .collect();
    raw.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
    let mut merged: Vec<CollapsedTerm> = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    for t in raw {
        match merged.last_mut() {
            Some(last) if t.exponent - anchor <= COLLAPSE_TOL => {
                last.q1 += t.q1;
                last.q2 += t.q2;
            }
            _ => {
                anchor = t.exponent;
                merged.push(t);
            }
        }
    }
    merged.retain(|t| t.q1.abs() >= CANCEL_TOL || t.q2.abs() >= CANCEL_TOL);
    merged
}

/// `M_j'`: one column per surviving exponent plus one per exponent with a
/// non-vanishing real moment.
pub fn collapsed_rank(terms: &[CollapsedTerm]) -> usize {
    terms.len() + terms.iter().filter(|t| t.is_confluent()).count()
}

/// `H = V_left · D · V_rightᵀ` for exact leading-order data.
#[derive(Clone, Debug)]
pub struct ExactFactorization {
    pub v_left: DMatrix<Complex64>,
    pub d_block: DMatrix<Complex64>,
    pub v_right: DMatrix<Complex64>,
    pub terms: Vec<CollapsedTerm>,
}

impl ExactFactorization {
    pub fn rank(&self) -> usize {
        self.d_block.nrows()
    }

    pub fn product(&self) -> DMatrix<Complex64> {
        &self.v_left * &self.d_block * self.v_right.transpose()
    }
}

/// Confluent Vandermonde matrix with `rows` rows: column `[ζ^p]` for every
/// term, followed by the derivative column `[p ζ^(p-1)]` for confluent ones.
fn confluent_vandermonde(zetas: &[(Complex64, bool)], rows: usize) -> DMatrix<Complex64> {
    let cols: usize = zetas.iter().map(|&(_, c)| if c { 2 } else { 1 }).sum();
    let mut v = DMatrix::from_element(rows, cols, ZERO);
    let mut c = 0;
    for &(zeta, confluent) in zetas {
        let mut pow = Complex64::new(1.0, 0.0);
        let mut prev = ZERO;
        for p in 0..rows {
            v[(p, c)] = pow;
            if confluent {
                v[(p, c + 1)] = prev * p as f64;
            }
            prev = pow;
            pow *= zeta;
        }
        c += if confluent { 2 } else { 1 };
    }
    v
}

/// Factor the exact Hankel matrix of direction `j` (extended variant)
/// through confluent Vandermonde matrices.
///
/// Each collapsed exponent with `ζ = exp(i k_min e_j·z)` contributes a
/// 2×2 block `[[(k_min Q1 + i Q2) ζ, k_min Q1 ζ²], [k_min Q1 ζ², 0]]` when
/// its real moment `Q1` survives, and `[i Q2 ζ]` otherwise.
pub fn exact_factorization(
    ensemble: &ScattererEnsemble,
    direction: usize,
    geometry: &AcquisitionGeometry,
    grid: &FrequencyGrid,
) -> ExactFactorization {
    let e = &geometry.effective_directions()[direction];
    let terms = collapse_exponents(ensemble, e);
    let k0 = grid.k_min;
    let zetas: Vec<(Complex64, bool)> = terms
        .iter()
        .map(|t| {
            (
                Complex64::from_polar(1.0, k0 * t.exponent),
                t.is_confluent(),
            )
        })
        .collect();
    let rank = collapsed_rank(&terms);
    let mut d = DMatrix::from_element(rank, rank, ZERO);
    let mut c = 0;
    for (t, &(zeta, confluent)) in terms.iter().zip(&zetas) {
        if confluent {
            let off = zeta * zeta * (k0 * t.q1);
            d[(c, c)] = (Complex64::new(k0 * t.q1, 0.0) + I * t.q2) * zeta;
            d[(c, c + 1)] = off;
            d[(c + 1, c)] = off;
            c += 2;
        } else {
            d[(c, c)] = I * t.q2 * zeta;
            c += 1;
        }
    }
    ExactFactorization {
        v_left: confluent_vandermonde(&zetas, grid.hankel_rows()),
        d_block: d,
        v_right: confluent_vandermonde(&zetas, grid.hankel_cols()),
        terms,
    }
}

/// How many leading singular vectors span the signal subspace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RankStrategy {
    /// Smallest `r` with `σ_{r+1} / σ_r < ratio`.
    Gap(f64),
    /// Number of `σ_l > rel_tol · σ_1`.
    Threshold(f64),
    Fixed(usize),
}

impl Default for RankStrategy {
    fn default() -> Self {
        RankStrategy::Gap(DEFAULT_GAP_RATIO)
    }
}

/// Essential rank of a non-increasing spectrum; 0 for an all-zero one.
/// `Gap` falls back to the full length when no gap is found, and `Fixed`
/// is clamped to `[1, len]`.
pub fn essential_rank(singular_values: &[f64], strategy: RankStrategy) -> usize {
    let n = singular_values.len();
    if let RankStrategy::Fixed(m) = strategy {
        return m.clamp(1, n.max(1));
    }
    let s1 = singular_values.first().copied().unwrap_or(0.0);
    if s1 <= 0.0 {
        return 0;
    }
    match strategy {
        RankStrategy::Gap(ratio) => singular_values
            .windows(2)
            .position(|w| w[0] == 0.0 || w[1] / w[0] < ratio)
            .map_or(n, |r| r + 1),
        RankStrategy::Threshold(tol) => singular_values.iter().filter(|&&s| s > tol * s1).count(),
        RankStrategy::Fixed(_) => unreachable!(),
    }
}

/// Orthogonal projector `P = B Bᴴ` onto the span of the leading left
/// singular vectors.
#[derive(Clone, Debug)]
pub struct SubspaceProjector {
    /// Orthonormal columns.
    pub basis: DMatrix<Complex64>,
    /// Full spectrum of the matrix the projector was built from.
    pub singular_values: Vec<f64>,
    /// Set when `σ_rank < 1e-14 σ_1`: some basis vectors span noise only.
    pub rank_deficient: bool,
}

impl SubspaceProjector {
    pub fn from_svd(svd: &Svd, rank: usize) -> Result<Self> {
        let max = svd.u.ncols();
        if rank == 0 || rank > max {
            return Err(Error::DimensionMismatch(format!(
                "projector rank {rank} outside [1, {max}]"
            )));
        }
        let s = &svd.singular_values;
        Ok(SubspaceProjector {
            basis: svd.u.columns(0, rank).into_owned(),
            singular_values: s.clone(),
            rank_deficient: s[rank - 1] < 1e-14 * s[0],
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Dense `B Bᴴ`.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        &self.basis * self.basis.adjoint()
    }

    /// `‖(I - P) φ‖₂` without forming `P`.
    pub(crate) fn rejection_norm(&self, phi: &[Complex64]) -> f64 {
        let b = &self.basis;
        let (n, r) = b.shape();
        let mut coef = vec![ZERO; r];
        for (c, slot) in coef.iter_mut().enumerate() {
            let col = b.column(c);
            *slot = (0..n).map(|p| col[p].conj() * phi[p]).sum();
        }
        (0..n)
            .map(|p| {
                let proj: Complex64 = (0..r).map(|c| b[(p, c)] * coef[c]).sum();
                (phi[p] - proj).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Projector onto the first `rank` left singular vectors of `matrix`.
pub fn projector_from(matrix: &DMatrix<Complex64>, rank: usize) -> Result<SubspaceProjector> {
    let max = matrix.nrows().min(matrix.ncols());
    if rank == 0 || rank > max {
        return Err(Error::DimensionMismatch(format!(
            "projector rank {rank} outside [1, {max}]"
        )));
    }
    SubspaceProjector::from_svd(&svd(matrix)?, rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AcquisitionMode, Scatterer};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fro(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn hankel_shape_and_structure() {
        let grid = FrequencyGrid::new(0.1, 16, 15);
        let row: Vec<Complex64> = (0..32).map(|i| c(i as f64, -(i as f64))).collect();
        let h = assemble_hankel(&row, &grid).unwrap();
        assert_eq!(h.shape(), (17, 16));
        for p in 0..17 {
            for q in 0..16 {
                assert_eq!(h[(p, q)], row[p + q]);
            }
        }
        assert!(matches!(
            assemble_hankel(&row[..30], &grid),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn constant_and_geometric_rows_are_rank_one() {
        let grid = FrequencyGrid::new(0.1, 5, 1);
        let ones = vec![c(1.0, 0.0); 10];
        let h = assemble_hankel(&ones, &grid).unwrap();
        assert_eq!(h.shape(), (9, 2));
        assert!(h.iter().all(|&x| x == c(1.0, 0.0)));
        let s = svd(&h).unwrap().singular_values;
        assert!(s[1] < 1e-12 * s[0]);

        let grid = FrequencyGrid::new(0.1, 8, 5);
        let zeta = Complex64::from_polar(1.0, 0.7);
        let geo: Vec<Complex64> = (1..=16).map(|n| zeta.powi(n)).collect();
        let s = svd(&assemble_hankel(&geo, &grid).unwrap())
            .unwrap()
            .singular_values;
        assert!(s[1..].iter().all(|&x| x < 1e-12 * s[0]));
    }

    #[test]
    fn svd_contract() {
        let id = DMatrix::<Complex64>::identity(3, 3);
        let s = svd(&id).unwrap();
        assert!(s.singular_values.iter().all(|&x| (x - 1.0).abs() < 1e-15));

        let a = DMatrix::from_vec(3, 1, vec![c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.5)]);
        let b = DMatrix::from_vec(2, 1, vec![c(-1.0, 1.0), c(2.0, 0.0)]);
        let outer = &a * b.adjoint();
        let s = svd(&outer).unwrap();
        assert!((s.singular_values[0] - fro(&a) * fro(&b)).abs() < 1e-12);
        assert!(s.singular_values[1] < 1e-12);

        let nan = DMatrix::from_element(2, 2, c(f64::NAN, 0.0));
        assert!(svd(&nan).is_err());
    }

    #[test]
    fn essential_rank_strategies() {
        let s = [1.0, 0.9, 1e-9, 1e-10];
        assert_eq!(essential_rank(&s, RankStrategy::Gap(1e-2)), 2);
        assert_eq!(essential_rank(&s, RankStrategy::Threshold(1e-8)), 2);
        assert_eq!(essential_rank(&s, RankStrategy::Fixed(6)), 4);
        assert_eq!(essential_rank(&[1.0; 8], RankStrategy::Fixed(6)), 6);
        assert_eq!(essential_rank(&[1.0; 8], RankStrategy::Fixed(0)), 1);
        assert_eq!(essential_rank(&[0.0; 4], RankStrategy::Gap(1e-2)), 0);
        assert_eq!(essential_rank(&[1.0, 0.5, 0.2], RankStrategy::Gap(1e-2)), 3);
    }

    fn geometry() -> AcquisitionGeometry {
        AcquisitionGeometry {
            dimension: 3,
            incident_direction: vec![1.0, 0.0, 0.0],
            receiver_directions: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.6, -0.8]],
            mode: AcquisitionMode::FixedIncidence,
        }
    }

    fn exact_hankel(ens: &ScattererEnsemble, j: usize, grid: &FrequencyGrid) -> DMatrix<Complex64> {
        let t = crate::forward::leading_order_farfield(ens, &geometry(), grid);
        let r = crate::forward::rescale_data(&t, grid, DataVariant::Extended);
        let row: Vec<Complex64> = r.row(j).iter().copied().collect();
        assemble_hankel(&row, grid).unwrap()
    }

    #[test]
    fn factorization_single_scatterer_cases() {
        let grid = FrequencyGrid::new(std::f64::consts::PI / 10.0, 8, 4);
        let ens =
            ScattererEnsemble::new(vec![Scatterer::point(vec![1.0, 2.0, -1.0], 0.7, 0.0)], 5.0);
        let f = exact_factorization(&ens, 0, &geometry(), &grid);
        assert_eq!(f.rank(), 2);
        assert_eq!(f.d_block[(1, 1)], c(0.0, 0.0));
        let h = exact_hankel(&ens, 0, &grid);
        assert!(fro(&(f.product() - &h)) <= 1e-10 * fro(&h));

        let ens =
            ScattererEnsemble::new(vec![Scatterer::point(vec![1.0, 2.0, -1.0], 0.0, 0.4)], 5.0);
        let f = exact_factorization(&ens, 1, &geometry(), &grid);
        assert_eq!(f.rank(), 1);
        let zeta = Complex64::from_polar(1.0, grid.k_min * f.terms[0].exponent);
        assert!((f.d_block[(0, 0)] - I * 0.4 * zeta).norm() < 1e-15);
        let h = exact_hankel(&ens, 1, &grid);
        assert!(fro(&(f.product() - &h)) <= 1e-10 * fro(&h));
    }

    #[test]
    fn cancelling_pair_gives_zero_hankel() {
        // e_0 = (1,-1,0): both positions project to 0.5
        let grid = FrequencyGrid::new(0.2, 6, 4);
        let ens = ScattererEnsemble::new(
            vec![
                Scatterer::point(vec![0.5, 0.0, 0.0], 0.3, 0.0),
                Scatterer::point(vec![1.5, 1.0, 2.0], -0.3, 0.0),
            ],
            5.0,
        );
        let f = exact_factorization(&ens, 0, &geometry(), &grid);
        assert!(f.terms.is_empty());
        assert_eq!(f.rank(), 0);
        let h = exact_hankel(&ens, 0, &grid);
        assert!(fro(&h) < 1e-14);
        assert_eq!(
            collapse_exponents(&ens, &geometry().effective_directions()[1]).len(),
            2
        );
    }

    #[test]
    fn projector_basics() {
        let a = DMatrix::from_vec(3, 1, vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)]);
        let m = &a * DMatrix::from_vec(1, 2, vec![c(1.0, 0.0), c(0.5, 0.5)]);
        let p = projector_from(&m, 1).unwrap();
        let col: Vec<Complex64> = a.iter().copied().collect();
        assert!(p.rejection_norm(&col) < 1e-12);
        let pm = p.matrix();
        assert!(fro(&(&pm * &pm - &pm)) < 1e-12);
        assert!(fro(&(&pm - pm.adjoint())) < 1e-12);
        assert!(projector_from(&m, 3).is_err());
        assert!(projector_from(&m, 0).is_err());
        // second singular value is zero
        assert!(projector_from(&m, 2).unwrap().rank_deficient);
    }
}
