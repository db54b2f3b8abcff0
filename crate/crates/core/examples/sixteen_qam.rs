//! 16-QAM over AWGN: the 14-parameter quantum transmitter against the
//! 40-parameter classical one, both with the same dense receiver.

use qcae::eval::{snr_sweep, SweepConfig};
use qcae::experiment::zoo_model;
use qcae::{train, TrainConfig};

fn main() -> qcae::Result<()> {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3000);
    let eval = SweepConfig { levels: vec![9.0, 12.0, 15.0, 18.0], batches: 50, ..SweepConfig::default() };
    for name in ["qc1_16qam", "cc1_16qam"] {
        let spec = zoo_model(name).expect("zoo entry");
        let cfg = TrainConfig { train_ebn0_db: Some(15.0), ..TrainConfig::new(steps, 0.01, 1) };
        let (model, _) = train(&spec, &cfg)?;
        let sweep = snr_sweep(&model, &eval)?;
        let curve: Vec<String> = sweep.points.iter().map(|p| format!("{}dB {:.4}", p.ebn0_db, p.ser)).collect();
        println!("{name} (tx {} params): {}", spec.tx_param_count(), curve.join(", "));
    }
    Ok(())
}
