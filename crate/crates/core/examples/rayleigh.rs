//! Two channel uses over Rayleigh fading: the 132-parameter quantum
//! receiver next to the classical baseline.

use qcae::eval::{snr_sweep, SweepConfig};
use qcae::experiment::zoo_model;
use qcae::{train, TrainConfig};

fn main() -> qcae::Result<()> {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3000);
    let eval = SweepConfig { batches: 100, ..SweepConfig::default() };
    for name in ["cq1_rayleigh", "cc_rayleigh"] {
        let spec = zoo_model(name).expect("zoo entry");
        let cfg = TrainConfig { train_ebn0_db: Some(15.0), ..TrainConfig::new(steps, 0.01, 1) };
        let (model, record) = train(&spec, &cfg)?;
        println!("{name}: rx {} params, train SER {:.4} ({:.1}s)", spec.rx_param_count(), record.final_ser, record.wall_clock_s);
        print!("{}", snr_sweep(&model, &eval)?.to_csv());
    }
    Ok(())
}
