use proptest::prelude::*;
use qcae::channel::{ChannelDraw, ChannelFamily};
use qcae::classical::{normalize_floored, softmax};
use qcae::qstate::{GateOp, PauliWord, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

fn gate(k: usize) -> impl Strategy<Value = GateOp> {
    let q = 0..k;
    let pair = (0..k, 1..k).prop_map(move |(a, d)| (a, (a + d) % k));
    let angle = -7.0..7.0f64;
    prop_oneof![
        (q.clone(), angle.clone()).prop_map(|(qubit, theta)| GateOp::Rx { qubit, theta }),
        (q.clone(), angle.clone()).prop_map(|(qubit, theta)| GateOp::Ry { qubit, theta }),
        (q.clone(), angle.clone()).prop_map(|(qubit, theta)| GateOp::Rz { qubit, theta }),
        (q.clone(), angle.clone(), angle.clone(), angle.clone())
            .prop_map(|(qubit, phi, theta, omega)| GateOp::Rot { qubit, phi, theta, omega }),
        q.prop_map(|qubit| GateOp::X { qubit }),
        pair.clone().prop_map(|(control, target)| GateOp::Cnot { control, target }),
        (pair, angle).prop_map(|((a, b), theta)| GateOp::Zz { a, b, theta }),
    ]
}

fn program() -> impl Strategy<Value = (usize, Vec<GateOp>)> {
    (2usize..=5).prop_flat_map(|k| (Just(k), prop::collection::vec(gate(k), 1..40)))
}

fn run(k: usize, gates: &[GateOp]) -> StateVector {
    let mut s = StateVector::new(k).unwrap();
    for g in gates {
        s.apply(g).unwrap();
    }
    s
}

proptest! {
    #[test]
    fn program_then_inverse_is_identity((k, gates) in program()) {
        let mut s = run(k, &gates);
        for g in gates.iter().rev() {
            s.apply(&g.inverse()).unwrap();
        }
        prop_assert!((s.amplitudes()[0].norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn marginals_are_consistent((k, gates) in program()) {
        let s = run(k, &gates);
        let pair = s.probabilities(&[0, 1]).unwrap();
        let first = s.probabilities(&[0]).unwrap();
        prop_assert!((pair[0] + pair[1] - first[0]).abs() < 1e-12);
        prop_assert!((pair[2] + pair[3] - first[1]).abs() < 1e-12);
        let z = s.expectation(&PauliWord::z(0)).unwrap();
        prop_assert!(z.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn normalization_hits_unit_average_power(x in prop::collection::vec(-5.0..5.0f64, 1..5)
        .prop_filter("even, away from zero", |v| v.iter().any(|a| a.abs() > 1e-3))
        .prop_map(|mut v| { if v.len() % 2 == 1 { v.push(0.5) } v })) {
        let y = normalize_floored(&x).unwrap();
        let power: f64 = y.iter().map(|v| v * v).sum();
        prop_assert!((power - (x.len() / 2) as f64).abs() < 1e-9);
        let again = normalize_floored(&y).unwrap();
        for (a, b) in y.iter().zip(&again) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_backward_is_the_adjoint(seed in any::<u64>(), n in 1usize..4, fading in any::<bool>(),
        x in prop::collection::vec(-2.0..2.0f64, 6), u in prop::collection::vec(-2.0..2.0f64, 6)) {
        let family = if fading { ChannelFamily::Rayleigh } else { ChannelFamily::Awgn };
        let draw = ChannelDraw::sample(family, n, 0.5, &mut ChaCha8Rng::seed_from_u64(seed));
        let (x, u) = (&x[..2 * n], &u[..2 * n]);
        let y = draw.apply(x).unwrap();
        let lhs: f64 = y.iter().zip(&draw.noise).zip(u).map(|((y, w), u)| (y - w) * u).sum();
        let rhs: f64 = x.iter().zip(draw.backward(u)).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn softmax_is_a_distribution(z in prop::collection::vec(-50.0..50.0f64, 1..10)) {
        let p = softmax(&z);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| *v >= 0.0));
    }
}

/// Largest gap between the empirical CDF of `samples` and `cdf`.
fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

// 0.1% critical value of the one-sample KS statistic is about 1.95/sqrt(n).
fn ks_critical(n: usize) -> f64 {
    1.95 / (n as f64).sqrt()
}

#[test]
fn awgn_noise_is_gaussian() {
    let sigma = 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    let noise: Vec<f64> =
        (0..20_000).flat_map(|_| ChannelDraw::sample(ChannelFamily::Awgn, 1, sigma, &mut rng).noise).collect();
    let normal = Normal::new(0.0, sigma).unwrap();
    let n = noise.len();
    assert!(ks_statistic(noise, |x| normal.cdf(x)) < ks_critical(n));
}

#[test]
fn fading_power_is_chi_squared_with_two_degrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let power: Vec<f64> = (0..40_000)
        .map(|_| {
            let [re, im] = ChannelDraw::sample(ChannelFamily::Rayleigh, 2, 0.1, &mut rng).fading.unwrap();
            re * re + im * im
        })
        .collect();
    let chi2 = ChiSquared::new(2.0).unwrap();
    let n = power.len();
    assert!(ks_statistic(power, |x| chi2.cdf(x)) < ks_critical(n));
}

#[test]
fn measurement_samples_follow_born_rule() {
    let gates = [
        GateOp::Ry { qubit: 0, theta: 1.1 },
        GateOp::Rx { qubit: 1, theta: 0.4 },
        GateOp::Cnot { control: 0, target: 2 },
        GateOp::Rot { qubit: 2, phi: 0.3, theta: 2.0, omega: -1.0 },
    ];
    let s = run(3, &gates);
    let shots = 50_000u64;
    let counts = s.sample(shots as usize, &mut ChaCha8Rng::seed_from_u64(92)).unwrap();
    let probs = s.probabilities(&[0, 1, 2]).unwrap();
    let mut stat = 0.0;
    let mut cells = 0;
    for (i, p) in probs.iter().enumerate() {
        let expected = p * shots as f64;
        let observed = *counts.get(&i).unwrap_or(&0) as f64;
        if expected > 5.0 {
            stat += (observed - expected).powi(2) / expected;
            cells += 1;
        } else {
            assert!(observed <= 25.0, "outcome {i}: {observed} hits at p = {p}");
        }
    }
    let critical = ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(stat < critical, "chi2 {stat} over {cells} cells, critical {critical}");
}
