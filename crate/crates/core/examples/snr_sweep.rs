//! Sweep a trained QQ1 model over Eb/N0 and compare with maximum-likelihood
//! QPSK detection at the same noise scale.

use qcae::channel::SigmaMode;
use qcae::eval::{qpsk_exact_ser, qpsk_ml_oracle, snr_sweep, SweepConfig};
use qcae::experiment::zoo_model;
use qcae::{train, TrainConfig};

fn main() -> qcae::Result<()> {
    let spec = zoo_model("qq1").expect("zoo entry");
    let (model, _) = train(&spec, &TrainConfig { train_ebn0_db: Some(15.0), ..TrainConfig::new(2000, 0.01, 1) })?;
    let eval = SweepConfig { batches: 100, seed: 9, ..SweepConfig::default() };
    let sweep = snr_sweep(&model, &eval)?;
    let oracle = qpsk_ml_oracle(&eval.levels, 100_000, SigmaMode::Paper, 9);
    println!("Eb/N0   qq1      ML (MC)  ML (exact)");
    for (p, o) in sweep.points.iter().zip(&oracle) {
        let exact = qpsk_exact_ser(spec.channel.sigma_at(p.ebn0_db));
        println!("{:>5}   {:.5}  {:.5}  {:.5}", p.ebn0_db, p.ser, o, exact);
    }
    Ok(())
}
