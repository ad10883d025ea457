// Choosing the subspace dimension by watching I1 peak counts settle.

use mfmusic::imaging::ModelOrderEstimate;
use mfmusic::presets::three_ellipsoids;
use mfmusic::{
    add_noise, estimate_model_order, leading_order_farfield, rescale_data, AcquisitionMode,
    DataVariant, ImagingGrid, ModelOrderOptions, NoiseSpec,
};

pub fn run_example() -> mfmusic::Result<ModelOrderEstimate> {
    let ex = three_ellipsoids(AcquisitionMode::FixedIncidence);
    let data = add_noise(
        &leading_order_farfield(&ex.ensemble, &ex.geometry, &ex.grid),
        &NoiseSpec::entrywise(0.1, 7),
    );
    let est = estimate_model_order(
        &rescale_data(&data, &ex.grid, DataVariant::Extended),
        &ex.grid,
        &ex.geometry,
        &ImagingGrid::cube(3, 5.0, 21),
        DataVariant::Extended,
        &ModelOrderOptions {
            mtilde_max: 8,
            ..ModelOrderOptions::default()
        },
    )?;
    for (m, count) in &est.trajectory {
        println!("M̃ = {m}: {count} peaks");
    }
    println!(
        "M = {}, L̃ = {}, stationary = {}",
        est.m_estimate, est.l_tilde, est.stationary
    );
    Ok(est)
}

#[allow(dead_code)]
fn main() -> mfmusic::Result<()> {
    run_example().map(|_| ())
}
