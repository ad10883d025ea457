// Writing an indicator field as CSV and VTK and reading both back.

use mfmusic::imaging::{direction_svds, fixed_rank_projectors};
use mfmusic::io;
use mfmusic::presets::three_ellipsoids;
use mfmusic::{
    indicator_i1, leading_order_farfield, rescale_data, AcquisitionMode, DataVariant, ImagingGrid,
};

pub fn run_example() -> mfmusic::Result<f64> {
    let ex = three_ellipsoids(AcquisitionMode::FixedIncidence);
    let data = leading_order_farfield(&ex.ensemble, &ex.geometry, &ex.grid);
    let rescaled = rescale_data(&data, &ex.grid, DataVariant::Extended);
    let projectors = fixed_rank_projectors(
        &direction_svds(&rescaled, &ex.grid, DataVariant::Extended)?,
        6,
    )?;
    let field = indicator_i1(
        &ImagingGrid::cube(3, 5.0, 11),
        &projectors,
        &ex.geometry.effective_directions(),
        ex.grid.k_min,
    )?;

    let dir = std::env::temp_dir().join(format!("mfmusic-export-{}", std::process::id()));
    io::write_field_csv(dir.join("i1.csv"), &field)?;
    io::write_field_vtk(dir.join("i1.vtk"), &field)?;
    let csv = io::read_field_csv_values(dir.join("i1.csv"))?;
    let (dims, vtk) = io::read_vtk_scalars(dir.join("i1.vtk"))?;
    let worst = csv
        .iter()
        .zip(&vtk)
        .map(|(a, b)| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    println!("{dims:?} nodes, largest CSV/VTK relative difference {worst:.1e}");
    let _ = std::fs::remove_dir_all(&dir);
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> mfmusic::Result<()> {
    run_example().map(|_| ())
}
