//! A small grid over learning rate and layer count for CQ1, written to a
//! temporary directory and ranked by SER at 15 dB.

use qcae::experiment::{grid, grid_csv, ExperimentConfig, Overrides};

fn main() -> qcae::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{
            "model": "cq1",
            "train": { "steps": 500, "lr": 0.01, "seed": 1 },
            "eval": { "levels": [9, 15], "batches": 20 },
            "grid": { "lr": [0.1, 0.01], "layers": [1, 2] }
        }"#,
    )?;
    let out = std::env::temp_dir().join("qcae_grid_example");
    let rows = grid(&cfg, &Overrides::default(), &out)?;
    print!("{}", grid_csv(&rows));
    println!("artifacts in {}", out.display());
    Ok(())
}
