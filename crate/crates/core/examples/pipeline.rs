// Config file in, artifacts out: the same path the command line takes.

use std::path::Path;

use mfmusic::pipeline::{run_pipeline, MTilde, ReconstructOptions, SimulateOptions};

pub fn run_example() -> mfmusic::Result<usize> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/example41.json");
    let out = std::env::temp_dir().join(format!("mfmusic-example-{}", std::process::id()));

    let (sim, rec) = run_pipeline(
        &config,
        &out,
        &SimulateOptions::default(),
        &ReconstructOptions {
            mtilde: MTilde::Fixed(6),
            grid_points: Some(vec![21]),
            ..ReconstructOptions::default()
        },
    )?;
    println!(
        "tensor {}×{}",
        sim.tensor.directions(),
        sim.tensor.frequencies()
    );
    for path in &rec.record.outputs {
        println!("wrote {path}");
    }
    println!("{} peaks", rec.peaks.len());
    let _ = std::fs::remove_dir_all(&out);
    Ok(rec.peaks.len())
}

#[allow(dead_code)]
fn main() -> mfmusic::Result<()> {
    run_example().map(|_| ())
}
