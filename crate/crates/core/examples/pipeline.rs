//! End to end through the experiment runner: d̄ bounds from the variation
//! profile, the renewal bound and a Monte Carlo check, written to a
//! temporary directory with checksums.
//!
//! cargo run --release --example pipeline

use gmeasure::experiment::{long_range_p2, run, ExperimentConfig, ExperimentKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("gmeasure-pipeline-example");
    let mut cfg = ExperimentConfig::new(ExperimentKind::Pipeline, &dir);
    cfg.seed = Some(42);
    cfg.model = Some(long_range_p2());
    cfg.schedule = Some("const:1".into());
    cfg.couple.depth = 48;
    cfg.couple.trajectories = 2000;
    cfg.pipeline.compare_from = 24;

    let manifest = run(&cfg)?;
    println!("wrote {} in {:.2} s", dir.display(), manifest.wall_clock_seconds);
    for (name, sum) in &manifest.outputs {
        println!("  {name:18} {}", &sum[..16]);
    }
    println!("{}", std::fs::read_to_string(dir.join("pipeline.json"))?);
    Ok(())
}
