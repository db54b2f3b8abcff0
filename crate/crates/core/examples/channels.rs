//! Eb/N0 to noise scale in both sigma modes, plus empirical AWGN and
//! Rayleigh statistics.

use qcae::channel::{awgn, rayleigh, sigma_for, SigmaMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qcae::Result<()> {
    println!("Eb/N0   sigma(paper)  sigma(textbook)   at R = 2");
    for db in [0.0, 6.0, 12.0, 18.0] {
        println!("{db:>5}   {:>11.5}  {:>15.5}", sigma_for(2.0, db, SigmaMode::Paper), sigma_for(2.0, db, SigmaMode::Textbook));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
    let sigma = 0.3;
    let trials = 50_000;
    let (mut var, mut h2) = (0.0, 0.0);
    for _ in 0..trials {
        let (y, _) = awgn(&x, sigma, &mut rng)?;
        var += (y[0] - x[0]).powi(2);
        let (_, draw) = rayleigh(&x, sigma, &mut rng)?;
        let [hr, hi] = draw.fading.expect("rayleigh draw carries fading");
        h2 += hr * hr + hi * hi;
    }
    println!("AWGN: empirical variance {:.5} vs sigma^2 {:.5}", var / trials as f64, sigma * sigma);
    println!("Rayleigh: E|h|^2 = {:.4} (h ~ N(0, I2), so 2)", h2 / trials as f64);
    Ok(())
}
