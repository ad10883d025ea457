// Hankel matrices of exact data and their Vandermonde factorizations.

use mfmusic::presets::three_ellipsoids;
use mfmusic::spectral::{hankel_matrices, svd};
use mfmusic::{
    exact_factorization, leading_order_farfield, rescale_data, AcquisitionMode, DataVariant,
};

pub fn run_example() -> mfmusic::Result<f64> {
    let ex = three_ellipsoids(AcquisitionMode::FixedIncidence);
    let tensor = leading_order_farfield(&ex.ensemble, &ex.geometry, &ex.grid);
    let hankels = hankel_matrices(
        &rescale_data(&tensor, &ex.grid, DataVariant::Extended),
        &ex.grid,
        DataVariant::Extended,
    )?;

    let mut worst = 0.0f64;
    for h in &hankels {
        let f = exact_factorization(&ex.ensemble, h.direction, &ex.geometry, &ex.grid);
        let err = (&f.product() - &h.entries).norm() / h.entries.norm();
        let sigma = svd(&h.entries)?.singular_values;
        let numerical = sigma.iter().filter(|&&s| s > 1e-8 * sigma[0]).count();
        println!(
            "j = {:2}: {}×{}, rank {} (numerical {numerical}), factorization error {err:.1e}",
            h.direction + 1,
            h.entries.nrows(),
            h.entries.ncols(),
            f.rank()
        );
        worst = worst.max(err);
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> mfmusic::Result<()> {
    run_example().map(|_| ())
}
