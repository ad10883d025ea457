// Singular spectra of noisy Hankel matrices and the rank strategies.

use mfmusic::imaging::direction_svds;
use mfmusic::presets::three_ellipsoids;
use mfmusic::{
    add_noise, essential_rank, leading_order_farfield, rescale_data, AcquisitionMode, DataVariant,
    NoiseSpec, RankStrategy,
};

pub fn run_example() -> mfmusic::Result<()> {
    let ex = three_ellipsoids(AcquisitionMode::FixedIncidence);
    let clean = leading_order_farfield(&ex.ensemble, &ex.geometry, &ex.grid);
    let noisy = add_noise(&clean, &NoiseSpec::entrywise(0.1, 7));

    for (label, data) in [("exact", &clean), ("10% noise", &noisy)] {
        let svds = direction_svds(
            &rescale_data(data, &ex.grid, DataVariant::Extended),
            &ex.grid,
            DataVariant::Extended,
        )?;
        let s = &svds[0].singular_values;
        let head: Vec<String> = s.iter().take(8).map(|x| format!("{x:.2e}")).collect();
        println!("{label}, j = 1: {}", head.join(" "));
        for strategy in [
            RankStrategy::Gap(1e-2),
            RankStrategy::Threshold(1e-8),
            RankStrategy::Fixed(6),
        ] {
            println!("  {strategy:?} -> {}", essential_rank(s, strategy));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> mfmusic::Result<()> {
    run_example()
}
