//! Ready-made experiments.

use std::f64::consts::PI;

use crate::model::{
    AcquisitionGeometry, AcquisitionMode, FrequencyGrid, ImagingGrid, Scatterer, ScattererEnsemble,
};

/// Twelve receiver directions on the unit sphere. Every triple of
/// `θ - x̂_j` with `θ = (1, 0, 0)`, and every triple of `x̂_j`, is linearly
/// independent, and in both acquisition modes every direction separates the
/// phases `k_min e_j·z_m` of the [`three_ellipsoids`] positions by at least
/// 0.5 rad.
pub const TWELVE_DIRECTIONS: [[f64; 3]; 12] = [
    [
        -0.9216521485997888,
        -0.062191482820121186,
        0.38300070032054406,
    ],
    [
        -0.9024625213474302,
        0.22541104726361808,
        -0.36708480945792077,
    ],
    [0.5865323016213672, -0.4686189439057591, -0.660587726624854],
    [
        -0.14681050875875462,
        -0.9451906128111413,
        -0.29165284152857984,
    ],
    [0.4154139638391101, -0.9049193311874217, 0.09247833633228668],
    [0.04468170317170339, 0.6253503406166647, 0.7790638593159723],
    [0.10731013149851663, 0.7102585201575354, 0.6957135690939188],
    [0.4894543166540871, -0.1565627297257747, -0.8578593028984965],
    [
        0.47076191294975345,
        -0.8423357433000089,
        -0.2623999178260356,
    ],
    [
        -0.5833173088822268,
        0.7404912295941279,
        -0.33378684224003397,
    ],
    [
        -0.9783443329323358,
        0.006713268143069138,
        -0.2068750788520024,
    ],
    [
        -0.5627669771297601,
        -0.33273461179031105,
        0.7566908269359308,
    ],
];

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub ensemble: ScattererEnsemble,
    pub geometry: AcquisitionGeometry,
    pub grid: FrequencyGrid,
    pub imaging: ImagingGrid,
}

/// Three ellipsoids in `B_5(0)` probed at 32 wavenumbers `nπ/10` from the
/// incident direction `(1, 0, 0)`:
///
/// | center       | semiaxes        | refractive index |
/// |--------------|-----------------|------------------|
/// | (2, 2, 2)    | (0.2, 0.2, 0.1) | 0.5 + 0.5i/k     |
/// | (-1, -3, -1) | (0.1, 0.1, 0.2) | 2                |
/// | (-3, 1, 2)   | (0.1, 0.1, 0.1) | 3 + i/k          |
pub fn three_ellipsoids(mode: AcquisitionMode) -> Experiment {
    let ensemble = ScattererEnsemble::new(
        vec![
            Scatterer::ellipsoid(vec![2.0, 2.0, 2.0], vec![0.2, 0.2, 0.1], -0.5, 0.5),
            Scatterer::ellipsoid(vec![-1.0, -3.0, -1.0], vec![0.1, 0.1, 0.2], 1.0, 0.0),
            Scatterer::ellipsoid(vec![-3.0, 1.0, 2.0], vec![0.1, 0.1, 0.1], 2.0, 1.0),
        ],
        5.0,
    );
    let geometry = AcquisitionGeometry {
        dimension: 3,
        incident_direction: vec![1.0, 0.0, 0.0],
        receiver_directions: TWELVE_DIRECTIONS.iter().map(|d| d.to_vec()).collect(),
        mode,
    };
    Experiment {
        ensemble,
        geometry,
        grid: FrequencyGrid::new(PI / 10.0, 16, 15),
        imaging: ImagingGrid::cube(3, 5.0, 41),
    }
}

/// Positions of [`three_ellipsoids`].
pub fn three_ellipsoid_positions() -> Vec<Vec<f64>> {
    vec![
        vec![2.0, 2.0, 2.0],
        vec![-1.0, -3.0, -1.0],
        vec![-3.0, 1.0, 2.0],
    ]
}
