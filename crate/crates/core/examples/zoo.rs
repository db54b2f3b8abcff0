//! The built-in model zoo with parameter counts per half.

use qcae::experiment::{zoo, zoo_table};

fn main() {
    print!("{}", zoo_table());
    let quantum: Vec<String> =
        zoo().into_iter().filter(|m| m.tx_kind() == "quantum" || m.rx_kind() == "quantum").map(|m| m.name).collect();
    println!("\nmodels with a quantum half: {}", quantum.join(", "));
}
