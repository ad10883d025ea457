//! Localization of small penetrable scatterers from multifrequency
//! far-field data with a single incident direction (or backscattering
//! data), by a MUSIC-type analysis of per-direction Hankel matrices.
//!
//! The pipeline:
//!
//! 1. [`forward`] synthesizes far-field tensors (leading-order model or Born
//!    quadrature) and perturbs them with seeded noise.
//! 2. [`spectral`] rescales each direction's samples, assembles the Hankel
//!    matrices, and extracts the signal subspaces by SVD.
//! 3. [`imaging`] evaluates the indicator functionals on a grid and picks
//!    peaks; [`imaging::estimate_model_order`] chooses the subspace size.
//!
//! [`config`], [`io`] and [`pipeline`] provide the file formats and the
//! command-line orchestration.

pub mod config;
pub mod error;
pub mod forward;
pub mod imaging;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod presets;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use forward::{
    add_noise, born_farfield, leading_order_farfield, rescale_data, DataVariant, NoiseMode,
    NoiseSpec,
};
pub use imaging::{
    estimate_model_order, extract_peaks, indicator_i1, indicator_i2, residual, test_vector,
    Functional, IndicatorField, ModelOrderOptions, PeakSet,
};
pub use model::{
    ellipsoid_moments, validate_experiment, AcquisitionGeometry, AcquisitionMode, FarFieldTensor,
    FrequencyGrid, ImagingGrid, Scatterer, ScattererEnsemble, ValidationReport,
};
pub use spectral::{
    assemble_hankel, essential_rank, exact_factorization, projector_from, svd, RankStrategy,
    SubspaceProjector,
};
