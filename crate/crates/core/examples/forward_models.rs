// Leading-order and Born far fields of one small ellipsoid as it shrinks.

use mfmusic::{
    born_farfield, leading_order_farfield, AcquisitionGeometry, AcquisitionMode, FrequencyGrid,
    Scatterer, ScattererEnsemble,
};

pub fn run_example() -> mfmusic::Result<Vec<f64>> {
    let geometry = AcquisitionGeometry {
        dimension: 3,
        incident_direction: vec![1.0, 0.0, 0.0],
        receiver_directions: vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, -1.0],
            vec![-0.6, 0.8, 0.0],
        ],
        mode: AcquisitionMode::FixedIncidence,
    };
    let grid = FrequencyGrid::new(std::f64::consts::PI / 10.0, 8, 4);

    let mut deviations = Vec::new();
    for step in 0..4 {
        let scale = 0.2 / 2f64.powi(step);
        let ensemble = ScattererEnsemble::new(
            vec![Scatterer::ellipsoid(
                vec![1.0, -0.5, 0.5],
                vec![scale, scale, 0.5 * scale],
                1.0,
                0.5,
            )],
            5.0,
        );
        let born = born_farfield(&ensemble, &geometry, &grid, 12)?;
        let leading = leading_order_farfield(&ensemble, &geometry, &grid);
        let dev = (&born.tensor.values - &leading.values).norm() / leading.values.norm();
        println!(
            "semiaxis {scale:.4}: relative deviation {dev:.3e}, quadrature error {:.1e}",
            born.error_estimate
        );
        deviations.push(dev);
    }
    for w in deviations.windows(2) {
        println!("halving ratio {:.3}", w[0] / w[1]);
    }
    Ok(deviations)
}

#[allow(dead_code)]
fn main() -> mfmusic::Result<()> {
    run_example().map(|_| ())
}
