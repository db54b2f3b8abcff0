//! Exact statevector simulation of small qubit registers.
//!
//! Qubit 0 is the most-significant bit of the basis-state index, so the
//! basis state `|b_0 b_1 ... b_{k-1}>` sits at index `b_0 * 2^{k-1} + ... + b_{k-1}`.
//! Reading a symbol's bits left to right therefore addresses qubits 0, 1, ...

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// A gate together with its target qubits and angles (radians).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum GateOp {
    Rx { qubit: usize, theta: f64 },
    Ry { qubit: usize, theta: f64 },
    Rz { qubit: usize, theta: f64 },
    /// General rotation `RZ(omega) . RY(theta) . RZ(phi)`.
    Rot { qubit: usize, phi: f64, theta: f64, omega: f64 },
    X { qubit: usize },
    Cnot { control: usize, target: usize },
    /// `exp(-i theta/2 Z(x)Z)`.
    Zz { a: usize, b: usize, theta: f64 },
}

impl GateOp {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::Rx { qubit, .. }
            | GateOp::Ry { qubit, .. }
            | GateOp::Rz { qubit, .. }
            | GateOp::Rot { qubit, .. }
            | GateOp::X { qubit } => vec![qubit],
            GateOp::Cnot { control, target } => vec![control, target],
            GateOp::Zz { a, b, .. } => vec![a, b],
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        for &q in &qubits {
            if q >= num_qubits {
                return Err(Error::QubitIndex { index: q, num_qubits });
            }
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::config(format!(
                "two-qubit gate on repeated qubit {}",
                qubits[0]
            )));
        }
        Ok(())
    }

    /// Dense unitary in row-major order: 2x2 for one-qubit gates, 4x4 for
    /// two-qubit gates with the first listed qubit as the high bit.
    pub fn matrix(&self) -> Vec<Complex64> {
        match *self {
            GateOp::Cnot { .. } => {
                let mut m = vec![ZERO; 16];
                m[0] = ONE;
                m[5] = ONE;
                m[2 * 4 + 3] = ONE;
                m[3 * 4 + 2] = ONE;
                m
            }
            GateOp::Zz { theta, .. } => {
                let (minus, plus) = zz_phases(theta);
                let mut m = vec![ZERO; 16];
                m[0] = minus;
                m[5] = plus;
                m[10] = plus;
                m[15] = minus;
                m
            }
            _ => self.single_qubit_matrix().expect("one-qubit gate").to_vec(),
        }
    }

    fn single_qubit_matrix(&self) -> Option<[Complex64; 4]> {
        Some(match *self {
            GateOp::Rx { theta, .. } => rx_matrix(theta),
            GateOp::Ry { theta, .. } => ry_matrix(theta),
            GateOp::Rz { theta, .. } => rz_matrix(theta),
            GateOp::Rot { phi, theta, omega, .. } => {
                mat_mul2(&rz_matrix(omega), &mat_mul2(&ry_matrix(theta), &rz_matrix(phi)))
            }
            GateOp::X { .. } => [ZERO, ONE, ONE, ZERO],
            GateOp::Cnot { .. } | GateOp::Zz { .. } => return None,
        })
    }

    /// Inverse gate (negated angles, reversed decomposition for `Rot`).
    pub fn inverse(&self) -> GateOp {
        match *self {
            GateOp::Rx { qubit, theta } => GateOp::Rx { qubit, theta: -theta },
            GateOp::Ry { qubit, theta } => GateOp::Ry { qubit, theta: -theta },
            GateOp::Rz { qubit, theta } => GateOp::Rz { qubit, theta: -theta },
            GateOp::Rot { qubit, phi, theta, omega } => GateOp::Rot {
                qubit,
                phi: -omega,
                theta: -theta,
                omega: -phi,
            },
            GateOp::Zz { a, b, theta } => GateOp::Zz { a, b, theta: -theta },
            g @ (GateOp::X { .. } | GateOp::Cnot { .. }) => g,
        }
    }
}

fn rx_matrix(theta: f64) -> [Complex64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [Complex64::new(c, 0.0), Complex64::new(0.0, -s), Complex64::new(0.0, -s), Complex64::new(c, 0.0)]
}

fn ry_matrix(theta: f64) -> [Complex64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0), Complex64::new(s, 0.0), Complex64::new(c, 0.0)]
}

fn rz_matrix(theta: f64) -> [Complex64; 4] {
    let half = theta / 2.0;
    [Complex64::from_polar(1.0, -half), ZERO, ZERO, Complex64::from_polar(1.0, half)]
}

fn zz_phases(theta: f64) -> (Complex64, Complex64) {
    let half = theta / 2.0;
    (Complex64::from_polar(1.0, -half), Complex64::from_polar(1.0, half))
}

fn mat_mul2(a: &[Complex64; 4], b: &[Complex64; 4]) -> [Complex64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// Tensor product of single-qubit Paulis; qubits not listed act as identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct PauliWord {
    pub factors: BTreeMap<usize, Pauli>,
}

// JSON object keys arrive as strings through buffered deserializers.
impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, Pauli>::deserialize(d)?;
        let factors = raw
            .into_iter()
            .map(|(k, p)| {
                k.parse::<usize>()
                    .map(|q| (q, p))
                    .map_err(|_| serde::de::Error::custom(format!("qubit index {k:?} is not a non-negative integer")))
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(PauliWord { factors })
    }
}

impl PauliWord {
    pub fn new(factors: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        PauliWord { factors: factors.into_iter().collect() }
    }

    pub fn single(qubit: usize, pauli: Pauli) -> Self {
        Self::new([(qubit, pauli)])
    }

    pub fn z(qubit: usize) -> Self {
        Self::single(qubit, Pauli::Z)
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        match self.factors.keys().find(|&&q| q >= num_qubits) {
            Some(&index) => Err(Error::QubitIndex { index, num_qubits }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self.factors.iter().map(|(q, p)| format!("{p:?}{q}")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Amplitudes of a `num_qubits`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `k` qubits.
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > MAX_QUBITS {
            return Err(Error::config(format!(
                "qubit count {k} outside the supported range 1..={MAX_QUBITS}"
            )));
        }
        let mut amplitudes = vec![ZERO; 1 << k];
        amplitudes[0] = ONE;
        Ok(StateVector { num_qubits: k, amplitudes })
    }

    /// Wraps raw amplitudes. The caller is responsible for normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::config(format!("amplitude count {len} is not a power of two >= 2")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::config(format!("{num_qubits} qubits exceeds {MAX_QUBITS}")));
        }
        Ok(StateVector { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &GateOp) {
        match *gate {
            GateOp::X { qubit } => {
                let m = self.mask(qubit);
                for i in 0..self.amplitudes.len() {
                    if i & m == 0 {
                        self.amplitudes.swap(i, i | m);
                    }
                }
            }
            GateOp::Cnot { control, target } => {
                let (cm, tm) = (self.mask(control), self.mask(target));
                for i in 0..self.amplitudes.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amplitudes.swap(i, i | tm);
                    }
                }
            }
            GateOp::Zz { a, b, theta } => {
                let (ma, mb) = (self.mask(a), self.mask(b));
                let (minus, plus) = zz_phases(theta);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    let odd = ((i & ma != 0) as u8) ^ ((i & mb != 0) as u8);
                    *amp *= if odd == 1 { plus } else { minus };
                }
            }
            GateOp::Rz { qubit, theta } => {
                let m = self.mask(qubit);
                let (lo, hi) = zz_phases(theta);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    *amp *= if i & m == 0 { lo } else { hi };
                }
            }
            GateOp::Ry { qubit, theta } => {
                // Real rotation; avoids complex multiplies on the hot path.
                let m = self.mask(qubit);
                let (s, c) = (theta / 2.0).sin_cos();
                for i in 0..self.amplitudes.len() {
                    if i & m == 0 {
                        let j = i | m;
                        let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
                        self.amplitudes[i] = a * c - b * s;
                        self.amplitudes[j] = a * s + b * c;
                    }
                }
            }
            _ => {
                let u = gate.single_qubit_matrix().expect("one-qubit gate");
                let qubit = gate.qubits()[0];
                self.apply_matrix2(qubit, &u);
            }
        }
    }

    fn apply_matrix2(&mut self, qubit: usize, u: &[Complex64; 4]) {
        let m = self.mask(qubit);
        for i in 0..self.amplitudes.len() {
            if i & m == 0 {
                let j = i | m;
                let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = u[0] * a + u[1] * b;
                self.amplitudes[j] = u[2] * a + u[3] * b;
            }
        }
    }

    /// Multiplies the state by a single-qubit Pauli (not a rotation).
    pub(crate) fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) {
        let m = self.mask(qubit);
        match pauli {
            Pauli::X => {
                for i in 0..self.amplitudes.len() {
                    if i & m == 0 {
                        self.amplitudes.swap(i, i | m);
                    }
                }
            }
            Pauli::Y => {
                for i in 0..self.amplitudes.len() {
                    if i & m == 0 {
                        let j = i | m;
                        let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
                        self.amplitudes[i] = -I * b;
                        self.amplitudes[j] = I * a;
                    }
                }
            }
            Pauli::Z => {
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if i & m != 0 {
                        *amp = -*amp;
                    }
                }
            }
        }
    }

    pub(crate) fn apply_pauli_word(&mut self, word: &PauliWord) {
        for (&q, &p) in &word.factors {
            self.apply_pauli(q, p);
        }
    }

    #[cfg(test)]
    /// `<self|other>`.
    pub(crate) fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `<self|P|ket>` without materialising `P|ket>`.
    pub(crate) fn pauli_matrix_element(&self, word: &PauliWord, ket: &StateVector) -> Complex64 {
        let mut flip = 0usize;
        let mut y_mask = 0usize;
        let mut z_mask = 0usize;
        for (&q, &p) in &word.factors {
            let m = self.mask(q);
            match p {
                Pauli::X => flip |= m,
                Pauli::Y => {
                    flip |= m;
                    y_mask |= m;
                }
                Pauli::Z => z_mask |= m,
            }
        }
        // (P ket)_j = ket[j ^ flip] * i^{#Y} * (-1)^{|j & z|} * (-1)^{|j' & y|}
        // where j' = j ^ flip is the source index: Y|0> = i|1>, Y|1> = -i|0>.
        let y_phase = match y_mask.count_ones() % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
        let mut acc = ZERO;
        for (j, bra) in self.amplitudes.iter().enumerate() {
            let src = j ^ flip;
            let negate = ((j & z_mask).count_ones() + (src & y_mask).count_ones()) % 2 == 1;
            let term = bra.conj() * ket.amplitudes[src];
            acc += if negate { -term } else { term };
        }
        acc * y_phase
    }

    /// `<psi|P|psi>` for a Pauli word.
    pub fn expectation(&self, obs: &PauliWord) -> Result<f64> {
        obs.validate(self.num_qubits)?;
        let value = self.pauli_matrix_element(obs, self);
        debug_assert!(value.im.abs() < 1e-9, "Pauli expectation has imaginary part {}", value.im);
        Ok(value.re)
    }

    /// Index of the outcome on `subset` (first listed qubit is the high bit)
    /// for each basis state.
    fn outcome_index(&self, basis: usize, subset: &[usize]) -> usize {
        subset
            .iter()
            .fold(0, |acc, &q| (acc << 1) | usize::from(basis & self.mask(q) != 0))
    }

    /// Born-rule marginal over an ordered qubit subset.
    pub fn probabilities(&self, subset: &[usize]) -> Result<Vec<f64>> {
        validate_subset(subset, self.num_qubits)?;
        let mut probs = vec![0.0; 1 << subset.len()];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            probs[self.outcome_index(i, subset)] += amp.norm_sqr();
        }
        Ok(probs)
    }

    pub(crate) fn outcome_indices(&self, subset: &[usize]) -> Vec<usize> {
        (0..self.amplitudes.len()).map(|i| self.outcome_index(i, subset)).collect()
    }

    /// Draws `shots` full-register measurements; keys are basis-state indices.
    pub fn sample<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Result<BTreeMap<usize, u64>> {
        if shots == 0 {
            return Err(Error::domain("shot count must be positive"));
        }
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut total = 0.0;
        for amp in &self.amplitudes {
            total += amp.norm_sqr();
            cumulative.push(total);
        }
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(counts)
    }
}

pub(crate) fn validate_subset(subset: &[usize], num_qubits: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::config("measurement subset is empty"));
    }
    for (i, &q) in subset.iter().enumerate() {
        if q >= num_qubits {
            return Err(Error::QubitIndex { index: q, num_qubits });
        }
        if subset[..i].contains(&q) {
            return Err(Error::config(format!("qubit {q} repeated in measurement subset")));
        }
    }
    Ok(())
}

/// `|0...0>` on `k` qubits.
pub fn new_state(k: usize) -> Result<StateVector> {
    StateVector::new(k)
}

/// Returns `U_g |state>` without modifying the input.
pub fn apply_gate(state: &StateVector, gate: &GateOp) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

pub fn expectation(state: &StateVector, obs: &PauliWord) -> Result<f64> {
    state.expectation(obs)
}

pub fn probabilities(state: &StateVector, subset: &[usize]) -> Result<Vec<f64>> {
    state.probabilities(subset)
}

pub fn sample<R: Rng + ?Sized>(
    state: &StateVector,
    shots: usize,
    rng: &mut R,
) -> Result<BTreeMap<usize, u64>> {
    state.sample(shots, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn assert_amps(state: &StateVector, expected: &[(f64, f64)]) {
        assert_eq!(state.amplitudes().len(), expected.len());
        for (a, &(re, im)) in state.amplitudes().iter().zip(expected) {
            assert!((a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12, "{a} vs ({re},{im})");
        }
    }

    fn bell() -> StateVector {
        let mut s = StateVector::new(2).unwrap();
        s.apply(&GateOp::Ry { qubit: 0, theta: PI / 2.0 }).unwrap();
        s.apply(&GateOp::Cnot { control: 0, target: 1 }).unwrap();
        s
    }

    #[test]
    fn fresh_registers() {
        assert_amps(&new_state(1).unwrap(), &[(1.0, 0.0), (0.0, 0.0)]);
        assert_amps(&new_state(2).unwrap(), &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let s = new_state(4).unwrap();
        assert_eq!(s.amplitudes().len(), 16);
        assert_eq!(s.amplitudes()[0], ONE);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn register_size_guard() {
        assert!(matches!(new_state(0), Err(Error::Config(_))));
        assert!(matches!(new_state(13), Err(Error::Config(_))));
        assert!(new_state(12).is_ok());
    }

    #[test]
    fn x_on_leftmost_qubit() {
        let s = apply_gate(&new_state(2).unwrap(), &GateOp::X { qubit: 0 }).unwrap();
        // |10> is index 2
        assert_amps(&s, &[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
    }

    #[test]
    fn ry_pi_flips() {
        let s = apply_gate(&new_state(1).unwrap(), &GateOp::Ry { qubit: 0, theta: PI }).unwrap();
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
        assert!((s.expectation(&PauliWord::z(0)).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cnot_builds_bell_pair() {
        let h = FRAC_1_SQRT_2;
        let plus = StateVector::from_amplitudes(vec![
            Complex64::new(h, 0.0),
            ZERO,
            Complex64::new(h, 0.0),
            ZERO,
        ])
        .unwrap();
        let s = apply_gate(&plus, &GateOp::Cnot { control: 0, target: 1 }).unwrap();
        assert_amps(&s, &[(h, 0.0), (0.0, 0.0), (0.0, 0.0), (h, 0.0)]);
    }

    #[test]
    fn bad_targets_rejected() {
        let s = new_state(2).unwrap();
        assert!(matches!(
            apply_gate(&s, &GateOp::X { qubit: 2 }),
            Err(Error::QubitIndex { index: 2, num_qubits: 2 })
        ));
        assert!(apply_gate(&s, &GateOp::Cnot { control: 1, target: 1 }).is_err());
    }

    #[test]
    fn basis_state_expectations() {
        let zero = new_state(2).unwrap();
        assert_eq!(expectation(&zero, &PauliWord::z(0)).unwrap(), 1.0);
        let s01 = apply_gate(&zero, &GateOp::X { qubit: 1 }).unwrap();
        assert_eq!(expectation(&s01, &PauliWord::z(0)).unwrap(), 1.0);
        assert_eq!(expectation(&s01, &PauliWord::z(1)).unwrap(), -1.0);
    }

    #[test]
    fn bell_correlations() {
        let s = bell();
        let zz = PauliWord::new([(0, Pauli::Z), (1, Pauli::Z)]);
        assert!((s.expectation(&zz).unwrap() - 1.0).abs() < 1e-12);
        assert!(s.expectation(&PauliWord::z(0)).unwrap().abs() < 1e-12);
        let xx = PauliWord::new([(0, Pauli::X), (1, Pauli::X)]);
        assert!((s.expectation(&xx).unwrap() - 1.0).abs() < 1e-12);
        let yy = PauliWord::new([(0, Pauli::Y), (1, Pauli::Y)]);
        assert!((s.expectation(&yy).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_probabilities() {
        let s = bell();
        let p = probabilities(&s, &[0, 1]).unwrap();
        for (got, want) in p.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        let p0 = probabilities(&s, &[0]).unwrap();
        assert!((p0[0] - 0.5).abs() < 1e-12 && (p0[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn basis_state_probabilities_one_hot() {
        let s = apply_gate(&new_state(2).unwrap(), &GateOp::X { qubit: 0 }).unwrap();
        assert_eq!(probabilities(&s, &[0, 1]).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        // reversed subset order reads the bits right to left
        assert_eq!(probabilities(&s, &[1, 0]).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_or_repeated_subset_is_config_error() {
        let s = new_state(2).unwrap();
        assert!(matches!(probabilities(&s, &[]), Err(Error::Config(_))));
        assert!(matches!(probabilities(&s, &[1, 1]), Err(Error::Config(_))));
        assert!(matches!(probabilities(&s, &[3]), Err(Error::QubitIndex { .. })));
    }

    #[test]
    fn sampling_deterministic_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let counts = sample(&new_state(1).unwrap(), 100, &mut rng).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&0], 100);
        let one = sample(&bell(), 1, &mut rng).unwrap();
        assert_eq!(one.values().sum::<u64>(), 1);
        assert!(matches!(sample(&bell(), 0, &mut rng), Err(Error::Domain(_))));
    }

    #[test]
    fn sampling_balanced_superposition() {
        let s = apply_gate(&new_state(1).unwrap(), &GateOp::Ry { qubit: 0, theta: PI / 2.0 }).unwrap();
        let shots = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let counts = sample(&s, shots, &mut rng).unwrap();
        let freq = counts.get(&0).copied().unwrap_or(0) as f64 / shots as f64;
        // binomial sd = 0.5/sqrt(1e5) ~ 0.00158, so 0.01 is > 6 sd
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
        let mut again = ChaCha8Rng::seed_from_u64(2024);
        assert_eq!(counts, sample(&s, shots, &mut again).unwrap());
    }

    #[test]
    fn rot_is_zyz() {
        let (phi, theta, omega) = (0.3, 1.1, -0.7);
        let mut a = new_state(1).unwrap();
        a.apply(&GateOp::Ry { qubit: 0, theta: 0.4 }).unwrap();
        let mut b = a.clone();
        a.apply(&GateOp::Rot { qubit: 0, phi, theta, omega }).unwrap();
        for g in [
            GateOp::Rz { qubit: 0, theta: phi },
            GateOp::Ry { qubit: 0, theta },
            GateOp::Rz { qubit: 0, theta: omega },
        ] {
            b.apply(&g).unwrap();
        }
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_undoes_gate() {
        let mut s = new_state(2).unwrap();
        s.apply(&GateOp::Ry { qubit: 1, theta: 0.9 }).unwrap();
        let start = s.clone();
        let g = GateOp::Rot { qubit: 1, phi: 0.2, theta: 1.3, omega: 2.1 };
        s.apply(&g).unwrap();
        s.apply(&g.inverse()).unwrap();
        for (x, y) in s.amplitudes().iter().zip(start.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    /// Full 4x4 operator of `g` on a 2-qubit register, built from `GateOp::matrix`.
    fn embed(g: &GateOp) -> Vec<Complex64> {
        let qs = g.qubits();
        let m = g.matrix();
        let bit = |basis: usize, q: usize| (basis >> (1 - q)) & 1;
        let mut full = vec![ZERO; 16];
        for out in 0..4 {
            for inp in 0..4 {
                full[out * 4 + inp] = if qs.len() == 1 {
                    let other = 1 - qs[0];
                    if bit(out, other) != bit(inp, other) {
                        continue;
                    }
                    m[bit(out, qs[0]) * 2 + bit(inp, qs[0])]
                } else {
                    let sub = |b: usize| (bit(b, qs[0]) << 1) | bit(b, qs[1]);
                    m[sub(out) * 4 + sub(inp)]
                };
            }
        }
        full
    }

    #[test]
    fn fast_paths_match_dense_matrices() {
        let gates = [
            GateOp::Rx { qubit: 0, theta: 0.35 },
            GateOp::Ry { qubit: 1, theta: 0.77 },
            GateOp::Rz { qubit: 0, theta: -1.4 },
            GateOp::Rot { qubit: 1, phi: 0.1, theta: -0.6, omega: 2.2 },
            GateOp::X { qubit: 1 },
            GateOp::Cnot { control: 1, target: 0 },
            GateOp::Cnot { control: 0, target: 1 },
            GateOp::Zz { a: 0, b: 1, theta: 0.61 },
        ];
        let mut prep = new_state(2).unwrap();
        prep.apply(&GateOp::Rot { qubit: 0, phi: 0.4, theta: 1.2, omega: 0.3 }).unwrap();
        prep.apply(&GateOp::Rx { qubit: 1, theta: 0.8 }).unwrap();
        for g in gates {
            let fast = apply_gate(&prep, &g).unwrap();
            let full = embed(&g);
            for out in 0..4 {
                let want: Complex64 = (0..4).map(|i| full[out * 4 + i] * prep.amplitudes()[i]).sum();
                let got = fast.amplitudes()[out];
                assert!((got - want).norm() < 1e-12, "{g:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn gate_matrices_are_unitary() {
        let gates = [
            GateOp::Rx { qubit: 0, theta: 1.9 },
            GateOp::Ry { qubit: 0, theta: -0.3 },
            GateOp::Rz { qubit: 0, theta: 4.0 },
            GateOp::Rot { qubit: 0, phi: 0.5, theta: 2.5, omega: -1.0 },
            GateOp::X { qubit: 0 },
            GateOp::Cnot { control: 0, target: 1 },
            GateOp::Zz { a: 0, b: 1, theta: 0.8 },
        ];
        for g in gates {
            let m = g.matrix();
            let dim = if m.len() == 4 { 2 } else { 4 };
            for r in 0..dim {
                for c in 0..dim {
                    let v: Complex64 = (0..dim).map(|k| m[k * dim + r].conj() * m[k * dim + c]).sum();
                    let want = if r == c { ONE } else { ZERO };
                    assert!((v - want).norm() < 1e-12, "{g:?} not unitary");
                }
            }
        }
    }

    #[test]
    fn matrix_element_matches_explicit_application() {
        let mut a = new_state(3).unwrap();
        let mut b = new_state(3).unwrap();
        for (q, t) in [(0, 0.4), (1, 1.3), (2, -0.8)] {
            a.apply(&GateOp::Rot { qubit: q, phi: t, theta: 2.0 * t, omega: -t }).unwrap();
            b.apply(&GateOp::Rx { qubit: q, theta: 1.0 + t }).unwrap();
        }
        a.apply(&GateOp::Cnot { control: 0, target: 2 }).unwrap();
        let words = [
            PauliWord::new([(0, Pauli::Y)]),
            PauliWord::new([(0, Pauli::X), (1, Pauli::Y), (2, Pauli::Z)]),
            PauliWord::new([(0, Pauli::Y), (2, Pauli::Y)]),
            PauliWord::new([(0, Pauli::Y), (1, Pauli::Y), (2, Pauli::Y)]),
        ];
        for w in &words {
            let mut image = b.clone();
            image.apply_pauli_word(w);
            let want = a.inner(&image);
            let got = a.pauli_matrix_element(w, &b);
            assert!((got - want).norm() < 1e-12, "{w}: {got} vs {want}");
        }
    }

    #[test]
    fn pauli_word_json_is_a_map() {
        let w = PauliWord::new([(0, Pauli::Z), (1, Pauli::X)]);
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, r#"{"0":"Z","1":"X"}"#);
        let back: PauliWord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
        assert_eq!(w.to_string(), "Z0*X1");
    }
}
