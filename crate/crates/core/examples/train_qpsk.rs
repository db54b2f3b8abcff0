//! Trains the classical CC1 and the fully quantum QQ1 autoencoders on 4-QAM
//! over AWGN at 15 dB and prints the learned constellations.

use qcae::experiment::zoo_model;
use qcae::{train, TrainConfig};

fn main() -> qcae::Result<()> {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    for name in ["cc1", "qq1"] {
        let spec = zoo_model(name).expect("zoo entry");
        let cfg = TrainConfig { train_ebn0_db: Some(15.0), ..TrainConfig::new(steps, 0.01, 2) };
        let (model, record) = train(&spec, &cfg)?;
        println!(
            "{name}: {} params, SER {:.3} -> {:.4}, loss {:.4}, converged by step {} ({:.1}s)",
            record.param_count, record.initial_ser, record.final_ser, record.final_loss, record.convergence_step, record.wall_clock_s
        );
        for (s, point) in model.constellation()?.iter().enumerate() {
            println!("  symbol {} -> ({:+.3}, {:+.3})", s + 1, point[0], point[1]);
        }
    }
    Ok(())
}
