//! Domain types shared by the forward model, the spectral analysis and the
//! imaging functionals, together with the admissibility checks that tie an
//! ensemble, an acquisition geometry and a frequency grid together.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Tolerance on the determinant of unit-normalized direction tuples.
pub const INDEPENDENCE_TOL: f64 = 1e-9;
/// Tolerance on `|x| = 1` for direction vectors.
pub const UNIT_TOL: f64 = 1e-12;
/// Effective directions shorter than this are treated as zero.
pub const DEGENERATE_TOL: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Constant-contrast ellipsoid, axis aligned and centered at the owning
/// scatterer's position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub semiaxes: Vec<f64>,
    pub q1: f64,
    pub q2: f64,
}

impl Ellipsoid {
    pub fn volume(&self) -> f64 {
        ellipsoid_volume(&self.semiaxes)
    }
}

/// Volume of an ellipse (two semiaxes) or ellipsoid (three semiaxes).
pub fn ellipsoid_volume(semiaxes: &[f64]) -> f64 {
    let prod: f64 = semiaxes.iter().product();
    match semiaxes.len() {
        2 => PI * prod,
        3 => 4.0 * PI / 3.0 * prod,
        d => panic!("ellipsoid volume requested in dimension {d}"),
    }
}

/// Contrast moments `(∫ q1, ∫ q2)` of a constant-contrast ellipsoid.
pub fn ellipsoid_moments(semiaxes: &[f64], q1: f64, q2: f64) -> (f64, f64) {
    let v = ellipsoid_volume(semiaxes);
    (q1 * v, q2 * v)
}

/// A small scatterer, reduced to its position and the integrals of its
/// real contrast and absorption over its support.
#[derive(Clone, Debug, PartialEq)]
pub struct Scatterer {
    pub position: Vec<f64>,
    pub moment_q1: f64,
    pub moment_q2: f64,
    pub shape: Option<Ellipsoid>,
}

impl Scatterer {
    pub fn point(position: Vec<f64>, moment_q1: f64, moment_q2: f64) -> Self {
        Scatterer {
            position,
            moment_q1,
            moment_q2,
            shape: None,
        }
    }

    /// Scatterer with an ellipsoidal support; the moments follow from the
    /// volume.
    pub fn ellipsoid(position: Vec<f64>, semiaxes: Vec<f64>, q1: f64, q2: f64) -> Self {
        let (moment_q1, moment_q2) = ellipsoid_moments(&semiaxes, q1, q2);
        Scatterer {
            position,
            moment_q1,
            moment_q2,
            shape: Some(Ellipsoid { semiaxes, q1, q2 }),
        }
    }
}

/// Scatterers may mix the sign of `moment_q1`; the localization results
/// assume q1 > -1 and q2 >= 0 pointwise, which only shaped scatterers check.
#[derive(Clone, Debug, PartialEq)]
pub struct ScattererEnsemble {
    pub scatterers: Vec<Scatterer>,
    /// Radius of the origin-centered ball that must contain every position.
    pub radius: f64,
}

impl ScattererEnsemble {
    pub fn new(scatterers: Vec<Scatterer>, radius: f64) -> Self {
        ScattererEnsemble { scatterers, radius }
    }

    pub fn len(&self) -> usize {
        self.scatterers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }

    /// `M + #{m : moment_q1 != 0}`, the generic rank of every Hankel matrix.
    pub fn m_prime(&self) -> usize {
        self.len()
            + self
                .scatterers
                .iter()
                .filter(|s| s.moment_q1 != 0.0)
                .count()
    }

    /// The same ensemble with every position shifted by `t`.
    pub fn translated(&self, t: &[f64]) -> Self {
        let mut out = self.clone();
        for s in &mut out.scatterers {
            for (p, dt) in s.position.iter_mut().zip(t) {
                *p += dt;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AcquisitionMode {
    /// One incident direction, many receivers.
    #[serde(rename = "fixed")]
    FixedIncidence,
    /// Each direction is both the incident and (negated) receiver direction.
    #[serde(rename = "backscatter")]
    Backscattering,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcquisitionGeometry {
    pub dimension: usize,
    pub incident_direction: Vec<f64>,
    pub receiver_directions: Vec<Vec<f64>>,
    pub mode: AcquisitionMode,
}

impl AcquisitionGeometry {
    pub fn num_directions(&self) -> usize {
        self.receiver_directions.len()
    }

    /// Phase vectors `e_j` such that every datum carries `exp(i k e_j·z)`:
    /// `θ - x̂_j` for fixed incidence and `2 x̂_j` for backscattering.
    pub fn effective_directions(&self) -> Vec<Vec<f64>> {
        self.receiver_directions
            .iter()
            .map(|x| match self.mode {
                AcquisitionMode::FixedIncidence => self
                    .incident_direction
                    .iter()
                    .zip(x)
                    .map(|(t, xi)| t - xi)
                    .collect(),
                AcquisitionMode::Backscattering => x.iter().map(|xi| 2.0 * xi).collect(),
            })
            .collect()
    }

    /// The same geometry acquired in another mode.
    pub fn with_mode(&self, mode: AcquisitionMode) -> Self {
        AcquisitionGeometry {
            mode,
            ..self.clone()
        }
    }
}

/// Equidistant wavenumbers `k_n = n k_min`, `n = 1..=2N`, with Hankel
/// window parameter `L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub k_min: f64,
    pub n: usize,
    pub l: usize,
}

impl FrequencyGrid {
    pub fn new(k_min: f64, n: usize, l: usize) -> Self {
        FrequencyGrid { k_min, n, l }
    }

    /// Number of wavenumbers, `2N`.
    pub fn len(&self) -> usize {
        2 * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Wavenumber with 1-based index `n`.
    pub fn wavenumber(&self, n: usize) -> f64 {
        n as f64 * self.k_min
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (1..=self.len()).map(|n| self.wavenumber(n)).collect()
    }

    pub fn k_max(&self) -> f64 {
        self.wavenumber(self.len())
    }

    /// Rows of every Hankel matrix, `2N - L`; also the test-vector length.
    pub fn hankel_rows(&self) -> usize {
        self.len() - self.l
    }

    /// Columns of every Hankel matrix, `L + 1`.
    pub fn hankel_cols(&self) -> usize {
        self.l + 1
    }
}

/// Complex far-field observations, one row per direction and one column
/// per wavenumber.
#[derive(Clone, Debug, PartialEq)]
pub struct FarFieldTensor {
    pub values: DMatrix<Complex64>,
    pub fingerprint: String,
}

impl FarFieldTensor {
    pub fn directions(&self) -> usize {
        self.values.nrows()
    }

    pub fn frequencies(&self) -> usize {
        self.values.ncols()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Row `j` as an owned vector.
    pub fn row(&self, j: usize) -> Vec<Complex64> {
        self.values.row(j).iter().copied().collect()
    }
}

/// Hex SHA-256 of the acquisition geometry and frequency grid. Two tensors
/// with the same fingerprint were sampled at the same directions and
/// wavenumbers.
pub fn geometry_fingerprint(geometry: &AcquisitionGeometry, grid: &FrequencyGrid) -> String {
    let mut h = Sha256::new();
    h.update(format!(
        "d={};mode={:?};",
        geometry.dimension, geometry.mode
    ));
    for v in std::iter::once(&geometry.incident_direction).chain(&geometry.receiver_directions) {
        for x in v {
            h.update(x.to_bits().to_le_bytes());
        }
        h.update(b"|");
    }
    h.update(grid.k_min.to_bits().to_le_bytes());
    h.update((grid.n as u64).to_le_bytes());
    h.update((grid.l as u64).to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Rectilinear sampling grid for the imaging functionals. Nodes are stored
/// with the first axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImagingGrid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
}

impl ImagingGrid {
    /// `points` nodes per axis over the cube `[-r, r]^d`.
    pub fn cube(dimension: usize, r: f64, points: usize) -> Self {
        ImagingGrid {
            lower: vec![-r; dimension],
            upper: vec![r; dimension],
            points: vec![points; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.points.len()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node spacing along `axis` (zero for a single-node axis).
    pub fn spacing(&self, axis: usize) -> f64 {
        let n = self.points[axis];
        if n < 2 {
            0.0
        } else {
            (self.upper[axis] - self.lower[axis]) / (n - 1) as f64
        }
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        if self.points[axis] < 2 {
            0.5 * (self.lower[axis] + self.upper[axis])
        } else {
            self.lower[axis] + i as f64 * self.spacing(axis)
        }
    }

    /// Per-axis indices of the node with linear index `index`.
    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        self.points
            .iter()
            .map(|&n| {
                let i = index % n;
                index /= n;
                i
            })
            .collect()
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.points)
            .rev()
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn node(&self, index: usize) -> Vec<f64> {
        self.multi_index(index)
            .into_iter()
            .enumerate()
            .map(|(a, i)| self.coordinate(a, i))
            .collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn translated(&self, t: &[f64]) -> Self {
        ImagingGrid {
            lower: self.lower.iter().zip(t).map(|(a, b)| a + b).collect(),
            upper: self.upper.iter().zip(t).map(|(a, b)| a + b).collect(),
            points: self.points.clone(),
        }
    }

    /// Shape checks against the search radius. The box may reach the
    /// corners of `[-R, R]^d`.
    pub fn validate(&self, dimension: usize, radius: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.lower.len() != dimension
            || self.upper.len() != dimension
            || self.points.len() != dimension
        {
            out.push(Violation::Dimension(format!(
                "imaging grid must have {dimension} components per corner and axis"
            )));
            return out;
        }
        let tol = 1e-12 * radius;
        for a in 0..dimension {
            if !(self.lower[a] < self.upper[a]) || self.points[a] == 0 {
                out.push(Violation::ImagingGrid(format!(
                    "axis {a} is empty or inverted"
                )));
            }
            if self.lower[a] < -radius - tol || self.upper[a] > radius + tol {
                out.push(Violation::ImagingGrid(format!(
                    "axis {a} extends beyond [-R, R] with R = {radius}"
                )));
            }
        }
        out
    }
}

/// One failed admissibility condition.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// `k_min > π / (2R)`: phases `k_min e_j·z` may alias inside the ball.
    KMinTooLarge {
        k_min: f64,
        limit: f64,
    },
    /// `N <= L`.
    TooFewFrequencies {
        n: usize,
        l: usize,
    },
    NonPositiveRadius(f64),
    Dimension(String),
    NoScatterers,
    NoDirections,
    NotUnit {
        what: String,
        norm: f64,
    },
    DuplicateDirections {
        first: usize,
        second: usize,
    },
    /// Receiver equal to the incident direction, zero phase vector.
    DegenerateDirection {
        index: usize,
    },
    /// A `d`-tuple of effective directions is linearly dependent.
    DependentDirections {
        indices: Vec<usize>,
        det: f64,
    },
    DuplicatePositions {
        first: usize,
        second: usize,
    },
    OutsideBall {
        index: usize,
        norm: f64,
    },
    InvalidMoment {
        index: usize,
        reason: String,
    },
    ImagingGrid(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::KMinTooLarge { k_min, limit } => {
                write!(f, "k_min = {k_min} exceeds pi/(2R) = {limit}")
            }
            Violation::TooFewFrequencies { n, l } => write!(f, "N = {n} must exceed L = {l}"),
            Violation::NonPositiveRadius(r) => write!(f, "radius_R = {r} must be positive"),
            Violation::Dimension(msg) => write!(f, "{msg}"),
            Violation::NoScatterers => write!(f, "at least one scatterer is required"),
            Violation::NoDirections => write!(f, "at least one receiver direction is required"),
            Violation::NotUnit { what, norm } => write!(f, "{what} has norm {norm}, expected 1"),
            Violation::DuplicateDirections { first, second } => {
                write!(f, "receiver directions {first} and {second} coincide")
            }
            Violation::DegenerateDirection { index } => write!(
                f,
                "receiver direction {index} has a zero effective direction (useless for localization)"
            ),
            Violation::DependentDirections { indices, det } => write!(
                f,
                "effective directions {indices:?} are linearly dependent (|det| = {det:.3e})"
            ),
            Violation::DuplicatePositions { first, second } => {
                write!(f, "scatterers {first} and {second} share a position")
            }
            Violation::OutsideBall { index, norm } => {
                write!(f, "scatterer {index} at |z| = {norm} is not inside the search ball")
            }
            Violation::InvalidMoment { index, reason } => {
                write!(f, "scatterer {index}: {reason}")
            }
            Violation::ImagingGrid(msg) => write!(f, "imaging grid: {msg}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn determinant(rows: &[&[f64]]) -> f64 {
    match rows.len() {
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => {
            let (a, b, c) = (rows[0], rows[1], rows[2]);
            a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0])
        }
        _ => unreachable!(),
    }
}

/// All strictly increasing index tuples of length `k` from `0..n`.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn check_geometry(geometry: &AcquisitionGeometry, out: &mut Vec<Violation>) {
    let d = geometry.dimension;
    if d != 2 && d != 3 {
        out.push(Violation::Dimension(format!("dimension {d} is not 2 or 3")));
        return;
    }
    if geometry.incident_direction.len() != d
        || geometry.receiver_directions.iter().any(|x| x.len() != d)
    {
        out.push(Violation::Dimension(format!(
            "direction vectors must have {d} components"
        )));
        return;
    }
    if geometry.receiver_directions.is_empty() {
        out.push(Violation::NoDirections);
        return;
    }
    if geometry.mode == AcquisitionMode::FixedIncidence {
        let nrm = norm(&geometry.incident_direction);
        if (nrm - 1.0).abs() > UNIT_TOL {
            out.push(Violation::NotUnit {
                what: "incident direction".into(),
                norm: nrm,
            });
        }
    }
    let dirs = &geometry.receiver_directions;
    for (j, x) in dirs.iter().enumerate() {
        let nrm = norm(x);
        if (nrm - 1.0).abs() > UNIT_TOL {
            out.push(Violation::NotUnit {
                what: format!("receiver direction {j}"),
                norm: nrm,
            });
        }
        for (i, y) in dirs.iter().enumerate().take(j) {
            if distance(x, y) <= UNIT_TOL {
                out.push(Violation::DuplicateDirections {
                    first: i,
                    second: j,
                });
            }
        }
    }

    let eff = geometry.effective_directions();
    let unit: Vec<Option<Vec<f64>>> = eff
        .iter()
        .map(|e| {
            let n = norm(e);
            (n > DEGENERATE_TOL).then(|| e.iter().map(|x| x / n).collect())
        })
        .collect();
    for (index, u) in unit.iter().enumerate() {
        if u.is_none() {
            out.push(Violation::DegenerateDirection { index });
        }
    }
    if dirs.len() >= d {
        for tuple in combinations(dirs.len(), d) {
            let rows: Option<Vec<&[f64]>> = tuple.iter().map(|&i| unit[i].as_deref()).collect();
            // tuples through a degenerate direction are already reported
            let Some(rows) = rows else { continue };
            let det = determinant(&rows);
            if det.abs() <= INDEPENDENCE_TOL {
                out.push(Violation::DependentDirections {
                    indices: tuple,
                    det: det.abs(),
                });
            }
        }
    }
}

fn check_ensemble(ensemble: &ScattererEnsemble, dimension: usize, out: &mut Vec<Violation>) {
    let r = ensemble.radius;
    if !(r > 0.0) {
        out.push(Violation::NonPositiveRadius(r));
        return;
    }
    if ensemble.is_empty() {
        out.push(Violation::NoScatterers);
        return;
    }
    for (index, s) in ensemble.scatterers.iter().enumerate() {
        if s.position.len() != dimension {
            out.push(Violation::Dimension(format!(
                "scatterer {index} position must have {dimension} components"
            )));
            continue;
        }
        let nrm = norm(&s.position);
        if nrm >= r {
            out.push(Violation::OutsideBall { index, norm: nrm });
        }
        if !(s.moment_q2 >= 0.0) {
            out.push(Violation::InvalidMoment {
                index,
                reason: format!("moment_q2 = {} must be non-negative", s.moment_q2),
            });
        }
        if s.moment_q1 == 0.0 && s.moment_q2 == 0.0 {
            out.push(Violation::InvalidMoment {
                index,
                reason: "both moments vanish".into(),
            });
        }
        if !s.moment_q1.is_finite() || !s.moment_q2.is_finite() {
            out.push(Violation::InvalidMoment {
                index,
                reason: "moments must be finite".into(),
            });
        }
        if let Some(shape) = &s.shape {
            if shape.semiaxes.len() != dimension || shape.semiaxes.iter().any(|a| !(*a > 0.0)) {
                out.push(Violation::InvalidMoment {
                    index,
                    reason: format!("semiaxes must be {dimension} positive reals"),
                });
                continue;
            }
            if !(shape.q1 > -1.0) || !(shape.q2 >= 0.0) {
                out.push(Violation::InvalidMoment {
                    index,
                    reason: format!(
                        "contrast (q1, q2) = ({}, {}) needs q1 > -1 and q2 >= 0",
                        shape.q1, shape.q2
                    ),
                });
            }
            let (m1, m2) = ellipsoid_moments(&shape.semiaxes, shape.q1, shape.q2);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
            if !close(m1, s.moment_q1) || !close(m2, s.moment_q2) {
                out.push(Violation::InvalidMoment {
                    index,
                    reason: "moments disagree with the ellipsoid volume and contrast".into(),
                });
            }
        }
    }
    for (j, b) in ensemble.scatterers.iter().enumerate() {
        for (i, a) in ensemble.scatterers.iter().enumerate().take(j) {
            if a.position.len() == b.position.len()
                && distance(&a.position, &b.position) <= 1e-9 * r
            {
                out.push(Violation::DuplicatePositions {
                    first: i,
                    second: j,
                });
            }
        }
    }
}

/// Collect every admissibility violation of an experiment. An empty report
/// means the configuration satisfies the sampling and independence
/// conditions of the localization scheme.
pub fn validate_experiment(
    ensemble: &ScattererEnsemble,
    geometry: &AcquisitionGeometry,
    grid: &FrequencyGrid,
) -> ValidationReport {
    let mut violations = Vec::new();
    check_ensemble(ensemble, geometry.dimension, &mut violations);
    check_geometry(geometry, &mut violations);
    if ensemble.radius > 0.0 {
        let limit = PI / (2.0 * ensemble.radius);
        // exact equality is admissible; allow for rounding in k_min itself
        if !(grid.k_min > 0.0) || grid.k_min > limit * (1.0 + 4.0 * f64::EPSILON) {
            violations.push(Violation::KMinTooLarge {
                k_min: grid.k_min,
                limit,
            });
        }
    }
    if grid.n <= grid.l || grid.l == 0 {
        violations.push(Violation::TooFewFrequencies {
            n: grid.n,
            l: grid.l,
        });
    }
    ValidationReport { violations }
}
