// Admissibility checks on a deliberately broken experiment.

use mfmusic::{
    validate_experiment, AcquisitionGeometry, AcquisitionMode, FrequencyGrid, Scatterer,
    ScattererEnsemble, ValidationReport,
};

pub fn run_example() -> ValidationReport {
    let ensemble = ScattererEnsemble::new(
        vec![
            Scatterer::point(vec![0.5, 0.0], 0.01, 0.0),
            Scatterer::point(vec![0.5, 0.0], 0.02, 0.0),
            Scatterer::point(vec![3.0, 0.0], 0.01, 0.0),
        ],
        2.0,
    );
    let geometry = AcquisitionGeometry {
        dimension: 2,
        incident_direction: vec![1.0, 0.0],
        receiver_directions: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]],
        mode: AcquisitionMode::FixedIncidence,
    };
    let grid = FrequencyGrid::new(1.0, 3, 3);

    let report = validate_experiment(&ensemble, &geometry, &grid);
    for v in &report.violations {
        println!("- {v}");
    }
    report
}

#[allow(dead_code)]
fn main() {
    assert!(!run_example().is_valid());
}
