//! Bell state preparation, Pauli expectations and shot sampling.

use qcae::qstate::{GateOp, Pauli, PauliWord, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qcae::Result<()> {
    let mut state = StateVector::new(2)?;
    state.apply(&GateOp::Ry { qubit: 0, theta: std::f64::consts::FRAC_PI_2 })?;
    state.apply(&GateOp::Cnot { control: 0, target: 1 })?;

    println!("amplitudes (qubit 0 is the leading bit):");
    for (i, a) in state.amplitudes().iter().enumerate() {
        println!("  |{i:02b}>  {:+.4} {:+.4}i", a.re, a.im);
    }
    let zz = PauliWord::new([(0, Pauli::Z), (1, Pauli::Z)]);
    let xx = PauliWord::new([(0, Pauli::X), (1, Pauli::X)]);
    println!("<Z0> = {:+.4}", state.expectation(&PauliWord::z(0))?);
    println!("<Z0 Z1> = {:+.4}, <X0 X1> = {:+.4}", state.expectation(&zz)?, state.expectation(&xx)?);
    println!("P(qubit 0) = {:?}", state.probabilities(&[0])?);

    let counts = state.sample(10_000, &mut ChaCha8Rng::seed_from_u64(7))?;
    println!("10000 shots: {counts:?}");
    Ok(())
}
