// Both indicator functionals on noisy data from three ellipsoids.

use mfmusic::imaging::{direction_svds, fixed_rank_projectors};
use mfmusic::presets::{three_ellipsoid_positions, three_ellipsoids};
use mfmusic::{
    add_noise, extract_peaks, indicator_i1, indicator_i2, leading_order_farfield, rescale_data,
    AcquisitionMode, DataVariant, ImagingGrid, NoiseSpec, PeakSet,
};

pub fn run_example() -> mfmusic::Result<(PeakSet, PeakSet)> {
    let ex = three_ellipsoids(AcquisitionMode::FixedIncidence);
    let data = add_noise(
        &leading_order_farfield(&ex.ensemble, &ex.geometry, &ex.grid),
        &NoiseSpec::entrywise(0.1, 7),
    );
    let rescaled = rescale_data(&data, &ex.grid, DataVariant::Extended);
    let projectors = fixed_rank_projectors(
        &direction_svds(&rescaled, &ex.grid, DataVariant::Extended)?,
        6,
    )?;
    let eff = ex.geometry.effective_directions();
    let grid = ImagingGrid::cube(3, 5.0, 21);

    let i1 = indicator_i1(&grid, &projectors, &eff, ex.grid.k_min)?;
    let i2 = indicator_i2(&grid, &projectors, &eff, ex.grid.k_min, 3, 3)?;
    let p1 = extract_peaks(&i1, 0.5, 1.0);
    let p2 = extract_peaks(&i2, 0.5, 1.0);
    for (name, peaks) in [("I1", &p1), ("I2", &p2)] {
        println!("{name}: {} peaks", peaks.len());
        for z in three_ellipsoid_positions() {
            println!("  nearest to {z:?}: {:.3}", peaks.distance_to(&z));
        }
    }
    Ok((p1, p2))
}

#[allow(dead_code)]
fn main() -> mfmusic::Result<()> {
    run_example().map(|_| ())
}
