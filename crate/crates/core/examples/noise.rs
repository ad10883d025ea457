// Seeded noise in both calibration modes.

use mfmusic::presets::three_ellipsoids;
use mfmusic::{add_noise, leading_order_farfield, AcquisitionMode, NoiseSpec};

pub fn run_example() -> mfmusic::Result<()> {
    let ex = three_ellipsoids(AcquisitionMode::FixedIncidence);
    let clean = leading_order_farfield(&ex.ensemble, &ex.geometry, &ex.grid);

    for spec in [NoiseSpec::new(0.1, 7), NoiseSpec::entrywise(0.1, 7)] {
        let noisy = add_noise(&clean, &spec);
        let ratio = (&noisy.values - &clean.values).norm() / clean.frobenius_norm();
        println!("{:?}: ‖E‖/‖U‖ = {ratio:.15}", spec.mode);
        assert_eq!(noisy, add_noise(&clean, &spec));
    }
    assert_eq!(add_noise(&clean, &NoiseSpec::new(0.0, 7)), clean);
    Ok(())
}

#[allow(dead_code)]
fn main() -> mfmusic::Result<()> {
    run_example()
}
