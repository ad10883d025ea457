// The same reconstruction applied unchanged to backscattering data.

use mfmusic::imaging::{direction_svds, fixed_rank_projectors};
use mfmusic::presets::{three_ellipsoid_positions, three_ellipsoids};
use mfmusic::{
    add_noise, extract_peaks, indicator_i1, leading_order_farfield, rescale_data, AcquisitionMode,
    DataVariant, NoiseSpec, PeakSet,
};

pub fn run_example() -> mfmusic::Result<PeakSet> {
    let ex = three_ellipsoids(AcquisitionMode::Backscattering);
    let data = add_noise(
        &leading_order_farfield(&ex.ensemble, &ex.geometry, &ex.grid),
        &NoiseSpec::entrywise(0.1, 7),
    );
    let rescaled = rescale_data(&data, &ex.grid, DataVariant::Extended);
    let projectors = fixed_rank_projectors(
        &direction_svds(&rescaled, &ex.grid, DataVariant::Extended)?,
        6,
    )?;
    let field = indicator_i1(
        &ex.imaging,
        &projectors,
        &ex.geometry.effective_directions(),
        ex.grid.k_min,
    )?;
    let peaks = extract_peaks(&field, 0.5, 1.0);
    for p in &peaks.peaks {
        println!("{:?} {:.4e}", p.position, p.value);
    }
    for z in three_ellipsoid_positions() {
        println!("distance to {z:?}: {:.3}", peaks.distance_to(&z));
    }
    Ok(peaks)
}

#[allow(dead_code)]
fn main() -> mfmusic::Result<()> {
    run_example().map(|_| ())
}
