//! Quantum encoder/decoder circuits built from declarative specs.
//!
//! A [`CircuitSpec`] describes three stages: a feature encoding that loads a
//! symbol or a real vector, a stack of core layers (single-qubit rotations
//! followed by CNOT entanglers, optionally re-uploading the encoding before
//! every layer), and a measurement head producing either Pauli expectations or
//! Born probabilities on a qubit subset.
//!
//! Specs compile into a [`Circuit`]: a flat list of gates whose angles are
//! affine expressions in the trainable parameters and the input features.
//! Keeping the angle expressions symbolic lets the gradient code in
//! [`crate::qgrad`] differentiate with respect to both without re-deriving the
//! circuit structure.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{validate_subset, GateOp, Pauli, PauliWord, StateVector, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    /// X gates on the binary digits of `s - 1`.
    Basis,
    /// `R_a(pi s / M) (x) R_b(pi s / M)`.
    DiscAngle,
    /// As `DiscAngle` followed by `R_Z(pi s / M)` on each qubit.
    DiscAngleZ,
    /// `R_a(w1 s) (x) R_b(w2 s)`.
    WeightedAngle,
    /// `R_Z(w1 s) R_a(w2 s) (x) R_Z(w3 s) R_b(w4 s)`.
    WeightedAngleZ,
    /// One qubit per real feature, `R(w_i y_i)`.
    FeatureAngle,
    /// Features loaded twice on disjoint qubit blocks, each copy with its own weights.
    FeatureAngleParallel,
    /// Alternating RX feature loads, a trainable ZZ coupling and trainable RY fields.
    Qaoa,
}

impl EncodingKind {
    pub fn takes_symbol(self) -> bool {
        matches!(
            self,
            EncodingKind::Basis
                | EncodingKind::DiscAngle
                | EncodingKind::DiscAngleZ
                | EncodingKind::WeightedAngle
                | EncodingKind::WeightedAngleZ
        )
    }
}

/// How encoding weights are reused when the encoding is re-uploaded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSharing {
    /// Every re-upload has its own weights.
    #[default]
    PerLayer,
    /// One weight set shared by all re-uploads.
    Shared,
}

fn default_axes() -> [Axis; 2] {
    [Axis::Y, Axis::Y]
}

fn default_one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub kind: EncodingKind,
    /// Rotation axes for even- and odd-indexed encoding qubits.
    #[serde(default = "default_axes")]
    pub axes: [Axis; 2],
    /// Trainable weights on feature angles (`feature_angle*` kinds only;
    /// symbol kinds carry the flag in their kind).
    #[serde(default)]
    pub weighted: bool,
    /// Real features loaded. Defaults to the qubit count (`feature_angle`),
    /// half of it (`feature_angle_parallel`) or 2 (`qaoa`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<usize>,
    #[serde(default)]
    pub weight_sharing: WeightSharing,
    /// Repetitions inside a `qaoa` embedding block.
    #[serde(default = "default_one")]
    pub qaoa_layers: usize,
}

impl EncodingSpec {
    pub fn new(kind: EncodingKind) -> Self {
        EncodingSpec {
            kind,
            axes: default_axes(),
            weighted: false,
            features: None,
            weight_sharing: WeightSharing::default(),
            qaoa_layers: 1,
        }
    }

    pub fn weighted(mut self) -> Self {
        self.weighted = true;
        self
    }

    pub fn shared(mut self) -> Self {
        self.weight_sharing = WeightSharing::Shared;
        self
    }

    pub fn is_weighted(&self) -> bool {
        match self.kind {
            EncodingKind::WeightedAngle | EncodingKind::WeightedAngleZ | EncodingKind::Qaoa => true,
            EncodingKind::FeatureAngle | EncodingKind::FeatureAngleParallel => self.weighted,
            _ => false,
        }
    }

    fn feature_count(&self, num_qubits: usize) -> usize {
        match self.kind {
            EncodingKind::FeatureAngle => self.features.unwrap_or(num_qubits),
            EncodingKind::FeatureAngleParallel => self.features.unwrap_or(num_qubits / 2),
            EncodingKind::Qaoa => self.features.unwrap_or(2),
            _ => 0,
        }
    }

    /// Trainable weights in one encoding block.
    fn block_params(&self, num_qubits: usize) -> usize {
        match self.kind {
            EncodingKind::Basis | EncodingKind::DiscAngle | EncodingKind::DiscAngleZ => 0,
            EncodingKind::WeightedAngle => 2,
            EncodingKind::WeightedAngleZ => 4,
            EncodingKind::FeatureAngle if self.weighted => self.feature_count(num_qubits),
            EncodingKind::FeatureAngleParallel if self.weighted => 2 * self.feature_count(num_qubits),
            EncodingKind::FeatureAngle | EncodingKind::FeatureAngleParallel => 0,
            EncodingKind::Qaoa => 3 * self.qaoa_layers,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationKind {
    /// `Rot(phi, theta, omega)` per qubit: 3 weights.
    GeneralRot,
    /// `RY(theta)` per qubit: 1 weight.
    RyOnly,
}

impl RotationKind {
    pub fn params_per_qubit(self) -> usize {
        match self {
            RotationKind::GeneralRot => 3,
            RotationKind::RyOnly => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreLayerSpec {
    pub rotation: RotationKind,
    /// Ordered (control, target) CNOT pairs applied after the rotations.
    #[serde(default)]
    pub entanglers: Vec<(usize, usize)>,
    pub layers: usize,
    #[serde(default)]
    pub reupload: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    Expectations,
    Probabilities,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSpec {
    pub head: HeadKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observables: Vec<PauliWord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subset: Vec<usize>,
    /// Trainable RY on every measured qubit right before measurement.
    #[serde(default)]
    pub measurement_weights: bool,
    /// Qubits carrying measurement weights when they differ from the measured ones.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weighted_qubits: Vec<usize>,
}

impl MeasurementSpec {
    pub fn expectations(observables: Vec<PauliWord>) -> Self {
        MeasurementSpec {
            head: HeadKind::Expectations,
            observables,
            subset: Vec::new(),
            measurement_weights: false,
            weighted_qubits: Vec::new(),
        }
    }

    /// `(<Z_0>, <Z_1>)`.
    pub fn local_z() -> Self {
        Self::expectations(vec![PauliWord::z(0), PauliWord::z(1)])
    }

    /// `(<Z_0 X_1>, <Z_2 X_3>)` for a 4-qubit encoder.
    pub fn paired_zx() -> Self {
        Self::expectations(vec![
            PauliWord::new([(0, Pauli::Z), (1, Pauli::X)]),
            PauliWord::new([(2, Pauli::Z), (3, Pauli::X)]),
        ])
    }

    pub fn probabilities(subset: Vec<usize>) -> Self {
        MeasurementSpec {
            head: HeadKind::Probabilities,
            observables: Vec::new(),
            subset,
            measurement_weights: false,
            weighted_qubits: Vec::new(),
        }
    }

    pub fn with_weights(mut self) -> Self {
        self.measurement_weights = true;
        self
    }

    /// Measurement weights on `qubits` instead of the measured ones.
    pub fn with_weights_on(mut self, qubits: Vec<usize>) -> Self {
        self.measurement_weights = true;
        self.weighted_qubits = qubits;
        self
    }

    /// Qubits that get a measurement weight, in parameter order.
    pub fn weight_qubits(&self) -> Vec<usize> {
        if !self.measurement_weights {
            Vec::new()
        } else if self.weighted_qubits.is_empty() {
            self.measured_qubits()
        } else {
            self.weighted_qubits.clone()
        }
    }

    /// Qubits read out, in ascending order for expectation heads and subset
    /// order for probability heads.
    pub fn measured_qubits(&self) -> Vec<usize> {
        match self.head {
            HeadKind::Probabilities => self.subset.clone(),
            HeadKind::Expectations => {
                let mut qs: Vec<usize> =
                    self.observables.iter().flat_map(|w| w.factors.keys().copied()).collect();
                qs.sort_unstable();
                qs.dedup();
                qs
            }
        }
    }

    pub fn output_len(&self) -> usize {
        match self.head {
            HeadKind::Expectations => self.observables.len(),
            HeadKind::Probabilities => 1 << self.subset.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocess {
    #[default]
    None,
    /// Elementwise `arctan` of the real input before encoding.
    Arctan,
}

/// One quantum encoder or decoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub num_qubits: usize,
    pub encoding: EncodingSpec,
    pub core: CoreLayerSpec,
    pub measurement: MeasurementSpec,
    #[serde(default)]
    pub preprocess: Preprocess,
    /// Symbol alphabet size.
    pub m: usize,
}

impl CircuitSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.num_qubits;
        if k == 0 || k > MAX_QUBITS {
            return Err(Error::config(format!("num_qubits {k} outside 1..={MAX_QUBITS}")));
        }
        if self.m < 2 {
            return Err(Error::config(format!("alphabet size m = {} must be >= 2", self.m)));
        }
        let enc = &self.encoding;
        match enc.kind {
            EncodingKind::Basis => {
                if !self.m.is_power_of_two() {
                    return Err(Error::config(format!("basis encoding needs m a power of two, got {}", self.m)));
                }
                let bits = self.m.trailing_zeros() as usize;
                if k < bits {
                    return Err(Error::config(format!("basis encoding of m = {} needs {bits} qubits, have {k}", self.m)));
                }
            }
            EncodingKind::DiscAngle
            | EncodingKind::DiscAngleZ
            | EncodingKind::WeightedAngle
            | EncodingKind::WeightedAngleZ => {
                if k < 2 {
                    return Err(Error::config("discretized angle encoding needs 2 qubits"));
                }
            }
            EncodingKind::FeatureAngle => {
                let d = enc.feature_count(k);
                if d == 0 || d > k {
                    return Err(Error::config(format!("feature_angle loads {d} features on {k} qubits")));
                }
            }
            EncodingKind::FeatureAngleParallel => {
                let d = enc.feature_count(k);
                if k < 4 {
                    return Err(Error::config("parallel feature encoding needs at least 4 qubits"));
                }
                if d == 0 || 2 * d > k {
                    return Err(Error::config(format!("parallel encoding of {d} features needs {} qubits, have {k}", 2 * d)));
                }
            }
            EncodingKind::Qaoa => {
                if k != 2 || enc.feature_count(k) != 2 {
                    return Err(Error::config("qaoa embedding is defined for 2 features on 2 qubits"));
                }
                if enc.qaoa_layers == 0 {
                    return Err(Error::config("qaoa embedding needs at least one layer"));
                }
            }
        }
        if self.preprocess == Preprocess::Arctan && enc.kind.takes_symbol() {
            return Err(Error::config("arctan pre-processing applies to real-valued inputs only"));
        }
        if self.core.layers == 0 {
            return Err(Error::config("core layer count must be >= 1"));
        }
        for &(c, t) in &self.core.entanglers {
            if c >= k || t >= k {
                return Err(Error::QubitIndex { index: c.max(t), num_qubits: k });
            }
            if c == t {
                return Err(Error::config(format!("entangler pair ({c}, {t}) repeats a qubit")));
            }
        }
        let meas = &self.measurement;
        if !meas.weighted_qubits.is_empty() {
            validate_subset(&meas.weighted_qubits, k)?;
        }
        match meas.head {
            HeadKind::Expectations => {
                if meas.observables.is_empty() {
                    return Err(Error::config("expectation head without observables"));
                }
                for w in &meas.observables {
                    w.validate(k)?;
                }
            }
            HeadKind::Probabilities => {
                validate_subset(&meas.subset, k)?;
                if meas.output_len() < self.m {
                    return Err(Error::config(format!(
                        "probability head over {} qubits has {} outcomes, fewer than m = {}",
                        meas.subset.len(),
                        meas.output_len(),
                        self.m
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn takes_symbol(&self) -> bool {
        self.encoding.kind.takes_symbol()
    }

    /// Dimension of the real input vector (0 for symbol encodings).
    pub fn input_dim(&self) -> usize {
        self.encoding.feature_count(self.num_qubits)
    }

    pub fn output_len(&self) -> usize {
        self.measurement.output_len()
    }

    fn encoding_blocks(&self) -> usize {
        if self.core.reupload && self.encoding.weight_sharing == WeightSharing::PerLayer {
            self.core.layers
        } else {
            1
        }
    }

    fn core_offset(&self) -> usize {
        self.encoding_blocks() * self.encoding.block_params(self.num_qubits)
    }

    fn measurement_offset(&self) -> usize {
        self.core_offset() + self.core.layers * self.core.rotation.params_per_qubit() * self.num_qubits
    }
}

/// Closed-form trainable parameter count:
/// encoding weights + layers * rotation weights + measurement weights.
pub fn param_count(spec: &CircuitSpec) -> usize {
    spec.measurement_offset() + spec.measurement.weight_qubits().len()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamRole {
    EncodingWeight,
    Core,
    MeasurementWeight,
}

/// Where a flat parameter lives in the circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSlot {
    pub role: ParamRole,
    /// Encoding block or core layer index (0 for measurement weights).
    pub layer: usize,
    /// Position within the layer (qubit for rotations, weight index for encodings).
    pub gate: usize,
    /// Angle slot within the gate (0..3 for `Rot`, else 0).
    pub slot: usize,
}

/// Flat parameter vector layout of a circuit spec.
pub fn param_layout(spec: &CircuitSpec) -> Vec<ParamSlot> {
    let mut slots = Vec::with_capacity(param_count(spec));
    let per_block = spec.encoding.block_params(spec.num_qubits);
    for layer in 0..spec.encoding_blocks() {
        for gate in 0..per_block {
            slots.push(ParamSlot { role: ParamRole::EncodingWeight, layer, gate, slot: 0 });
        }
    }
    let per_qubit = spec.core.rotation.params_per_qubit();
    for layer in 0..spec.core.layers {
        for gate in 0..spec.num_qubits {
            for slot in 0..per_qubit {
                slots.push(ParamSlot { role: ParamRole::Core, layer, gate, slot });
            }
        }
    }
    for gate in spec.measurement.weight_qubits() {
        slots.push(ParamSlot { role: ParamRole::MeasurementWeight, layer: 0, gate, slot: 0 });
    }
    slots
}

/// Parameter values plus the layout that gives them meaning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBinding {
    pub values: Vec<f64>,
    pub layout: Vec<ParamSlot>,
}

impl ParamBinding {
    pub fn new(spec: &CircuitSpec, values: Vec<f64>) -> Result<Self> {
        let layout = param_layout(spec);
        if layout.len() != values.len() {
            return Err(Error::config(format!(
                "circuit expects {} parameters, got {}",
                layout.len(),
                values.len()
            )));
        }
        Ok(ParamBinding { values, layout })
    }
}

/// Rotation angles uniform on `[0, 2 pi)`. Encoding weights multiply
/// features, so they start uniform on `[0, 1)` to keep early angles small.
pub fn init_params<R: Rng + ?Sized>(spec: &CircuitSpec, rng: &mut R) -> Vec<f64> {
    param_layout(spec)
        .iter()
        .map(|slot| match slot.role {
            ParamRole::EncodingWeight => rng.random::<f64>(),
            _ => rng.random::<f64>() * TAU,
        })
        .collect()
}

/// Affine angle expression in the trainable parameters `theta` and features `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Fixed(f64),
    /// `scale * theta[index]`
    Param { index: usize, scale: f64 },
    /// `scale * y[feature]`
    Feature { feature: usize, scale: f64 },
    /// `theta[param] * y[feature]`
    WeightedFeature { param: usize, feature: usize },
}

impl Angle {
    #[inline]
    pub fn value(&self, params: &[f64], features: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(v) => v,
            Angle::Param { index, scale } => scale * params[index],
            Angle::Feature { feature, scale } => scale * features[feature],
            Angle::WeightedFeature { param, feature } => params[param] * features[feature],
        }
    }

    /// `(param index, d angle / d theta[index])`, if the angle depends on a parameter.
    #[inline]
    pub fn param_derivative(&self, features: &[f64]) -> Option<(usize, f64)> {
        match *self {
            Angle::Param { index, scale } => Some((index, scale)),
            Angle::WeightedFeature { param, feature } => Some((param, features[feature])),
            _ => None,
        }
    }

    /// `(feature index, d angle / d y[feature])`, if the angle depends on a feature.
    #[inline]
    pub fn feature_derivative(&self, params: &[f64]) -> Option<(usize, f64)> {
        match *self {
            Angle::Feature { feature, scale } => Some((feature, scale)),
            Angle::WeightedFeature { param, feature } => Some((feature, params[param])),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    X(usize),
    Cnot(usize, usize),
    Rx(usize),
    Ry(usize),
    Rz(usize),
    Zz(usize, usize),
}

impl OpKind {
    pub fn is_rotation(self) -> bool {
        !matches!(self, OpKind::X(_) | OpKind::Cnot(..))
    }

    /// Pauli generator `G` with `U(a) = exp(-i a G / 2)`.
    pub fn generator(self) -> Option<PauliWord> {
        match self {
            OpKind::Rx(q) => Some(PauliWord::single(q, Pauli::X)),
            OpKind::Ry(q) => Some(PauliWord::single(q, Pauli::Y)),
            OpKind::Rz(q) => Some(PauliWord::single(q, Pauli::Z)),
            OpKind::Zz(a, b) => Some(PauliWord::new([(a, Pauli::Z), (b, Pauli::Z)])),
            OpKind::X(_) | OpKind::Cnot(..) => None,
        }
    }

    pub fn gate(self, angle: f64) -> GateOp {
        match self {
            OpKind::X(qubit) => GateOp::X { qubit },
            OpKind::Cnot(control, target) => GateOp::Cnot { control, target },
            OpKind::Rx(qubit) => GateOp::Rx { qubit, theta: angle },
            OpKind::Ry(qubit) => GateOp::Ry { qubit, theta: angle },
            OpKind::Rz(qubit) => GateOp::Rz { qubit, theta: angle },
            OpKind::Zz(a, b) => GateOp::Zz { a, b, theta: angle },
        }
    }

    fn axis(axis: Axis, qubit: usize) -> OpKind {
        match axis {
            Axis::X => OpKind::Rx(qubit),
            Axis::Y => OpKind::Ry(qubit),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Op {
    pub kind: OpKind,
    /// `None` for fixed gates (X, CNOT).
    pub angle: Option<Angle>,
}

impl Op {
    fn fixed(kind: OpKind) -> Self {
        Op { kind, angle: None }
    }

    fn rot(kind: OpKind, angle: Angle) -> Self {
        Op { kind, angle: Some(angle) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Head {
    Expectations(Vec<PauliWord>),
    Probabilities(Vec<usize>),
}

/// A compiled parametric circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_params: usize,
    pub num_features: usize,
    pub ops: Vec<Op>,
    pub head: Head,
}

impl Circuit {
    /// Checks gate/angle consistency and index ranges.
    pub fn validate(&self) -> Result<()> {
        for op in &self.ops {
            match (op.kind.is_rotation(), op.angle) {
                (false, Some(_)) => {
                    return Err(Error::Unsupported(format!(
                        "{:?} has no rotation generator to carry an angle",
                        op.kind
                    )))
                }
                (true, None) => return Err(Error::config(format!("{:?} is missing its angle", op.kind))),
                _ => {}
            }
            op.kind.gate(0.0).validate(self.num_qubits)?;
            if let Some(angle) = op.angle {
                let bad_param = matches!(angle, Angle::Param { index, .. } if index >= self.num_params)
                    || matches!(angle, Angle::WeightedFeature { param, .. } if param >= self.num_params);
                let bad_feature = matches!(angle, Angle::Feature { feature, .. } if feature >= self.num_features)
                    || matches!(angle, Angle::WeightedFeature { feature, .. } if feature >= self.num_features);
                if bad_param || bad_feature {
                    return Err(Error::config(format!("angle {angle:?} references out-of-range inputs")));
                }
            }
        }
        match &self.head {
            Head::Expectations(words) => {
                for w in words {
                    w.validate(self.num_qubits)?;
                }
            }
            Head::Probabilities(subset) => validate_subset(subset, self.num_qubits)?,
        }
        Ok(())
    }

    pub fn output_len(&self) -> usize {
        match &self.head {
            Head::Expectations(words) => words.len(),
            Head::Probabilities(subset) => 1 << subset.len(),
        }
    }

    /// Concrete gate list for the given parameters and features.
    pub fn bind(&self, params: &[f64], features: &[f64]) -> Vec<GateOp> {
        self.ops
            .iter()
            .map(|op| op.kind.gate(op.angle.map_or(0.0, |a| a.value(params, features))))
            .collect()
    }

    fn check_inputs(&self, params: &[f64], features: &[f64]) -> Result<()> {
        if params.len() != self.num_params {
            return Err(Error::config(format!(
                "circuit expects {} parameters, got {}",
                self.num_params,
                params.len()
            )));
        }
        if features.len() != self.num_features {
            return Err(Error::domain(format!(
                "circuit expects {} features, got {}",
                self.num_features,
                features.len()
            )));
        }
        Ok(())
    }

    /// Final state, optionally with one op's angle offset by `shift`.
    pub(crate) fn state_with_shift(
        &self,
        params: &[f64],
        features: &[f64],
        shift: Option<(usize, f64)>,
    ) -> StateVector {
        let mut state = StateVector::new(self.num_qubits).expect("validated qubit count");
        for (i, op) in self.ops.iter().enumerate() {
            let mut angle = op.angle.map_or(0.0, |a| a.value(params, features));
            if let Some((target, delta)) = shift {
                if target == i {
                    angle += delta;
                }
            }
            state.apply_unchecked(&op.kind.gate(angle));
        }
        state
    }

    pub fn state(&self, params: &[f64], features: &[f64]) -> Result<StateVector> {
        self.check_inputs(params, features)?;
        Ok(self.state_with_shift(params, features, None))
    }

    pub(crate) fn head_outputs(&self, state: &StateVector) -> Vec<f64> {
        match &self.head {
            Head::Expectations(words) => words
                .iter()
                .map(|w| state.expectation(w).expect("validated observable"))
                .collect(),
            Head::Probabilities(subset) => state.probabilities(subset).expect("validated subset"),
        }
    }

    /// Head outputs: expectations in `[-1, 1]` or a Born distribution.
    pub fn outputs(&self, params: &[f64], features: &[f64]) -> Result<Vec<f64>> {
        Ok(self.head_outputs(&self.state(params, features)?))
    }

    pub(crate) fn outputs_with_shift(
        &self,
        params: &[f64],
        features: &[f64],
        shift: Option<(usize, f64)>,
    ) -> Vec<f64> {
        self.head_outputs(&self.state_with_shift(params, features, shift))
    }
}

/// What a circuit consumes: an integer symbol or a real feature vector.
#[derive(Clone, Debug, PartialEq)]
pub enum CircuitInput {
    Symbol(usize),
    Features(Vec<f64>),
}

impl From<usize> for CircuitInput {
    fn from(s: usize) -> Self {
        CircuitInput::Symbol(s)
    }
}

impl From<Vec<f64>> for CircuitInput {
    fn from(y: Vec<f64>) -> Self {
        CircuitInput::Features(y)
    }
}

impl From<&[f64]> for CircuitInput {
    fn from(y: &[f64]) -> Self {
        CircuitInput::Features(y.to_vec())
    }
}

fn check_symbol(s: usize, m: usize) -> Result<()> {
    if s == 0 || s > m {
        return Err(Error::domain(format!("symbol {s} outside 1..={m}")));
    }
    Ok(())
}

// Emitters append ops for one stage. `base` is the flat index of the
// stage's first parameter.

fn emit_basis(ops: &mut Vec<Op>, s: usize, m: usize) {
    let bits = m.trailing_zeros() as usize;
    let value = s - 1;
    for qubit in 0..bits {
        if (value >> (bits - 1 - qubit)) & 1 == 1 {
            ops.push(Op::fixed(OpKind::X(qubit)));
        }
    }
}

fn emit_disc_angle(ops: &mut Vec<Op>, enc: &EncodingSpec, s: usize, m: usize, base: usize) {
    let sf = s as f64;
    let fixed = Angle::Fixed(PI * sf / m as f64);
    let weight = |i: usize| Angle::Param { index: base + i, scale: sf };
    for qubit in 0..2 {
        let rot = OpKind::axis(enc.axes[qubit], qubit);
        match enc.kind {
            EncodingKind::DiscAngle => ops.push(Op::rot(rot, fixed)),
            EncodingKind::DiscAngleZ => {
                ops.push(Op::rot(rot, fixed));
                ops.push(Op::rot(OpKind::Rz(qubit), fixed));
            }
            EncodingKind::WeightedAngle => ops.push(Op::rot(rot, weight(qubit))),
            EncodingKind::WeightedAngleZ => {
                // weights per qubit: (w_z, w_axis); the axis rotation acts first
                ops.push(Op::rot(rot, weight(2 * qubit + 1)));
                ops.push(Op::rot(OpKind::Rz(qubit), weight(2 * qubit)));
            }
            _ => unreachable!("not a discretized angle encoding"),
        }
    }
}

fn emit_features(ops: &mut Vec<Op>, enc: &EncodingSpec, num_qubits: usize, base: usize) {
    let d = enc.feature_count(num_qubits);
    let copies = if enc.kind == EncodingKind::FeatureAngleParallel { 2 } else { 1 };
    for copy in 0..copies {
        for feature in 0..d {
            let slot = copy * d + feature;
            let angle = if enc.weighted {
                Angle::WeightedFeature { param: base + slot, feature }
            } else {
                Angle::Feature { feature, scale: 1.0 }
            };
            ops.push(Op::rot(OpKind::axis(enc.axes[feature % 2], slot), angle));
        }
    }
}

fn emit_qaoa(ops: &mut Vec<Op>, layers: usize, base: usize) {
    let load = |ops: &mut Vec<Op>| {
        for q in 0..2 {
            ops.push(Op::rot(OpKind::Rx(q), Angle::Feature { feature: q, scale: 1.0 }));
        }
    };
    for layer in 0..layers {
        let w = base + 3 * layer;
        load(ops);
        ops.push(Op::rot(OpKind::Zz(0, 1), Angle::Param { index: w, scale: 1.0 }));
        ops.push(Op::rot(OpKind::Ry(0), Angle::Param { index: w + 1, scale: 1.0 }));
        ops.push(Op::rot(OpKind::Ry(1), Angle::Param { index: w + 2, scale: 1.0 }));
    }
    load(ops);
}

fn emit_encoding(ops: &mut Vec<Op>, spec: &CircuitSpec, symbol: Option<usize>, base: usize) {
    let enc = &spec.encoding;
    match enc.kind {
        EncodingKind::Basis => emit_basis(ops, symbol.expect("symbol input"), spec.m),
        EncodingKind::DiscAngle
        | EncodingKind::DiscAngleZ
        | EncodingKind::WeightedAngle
        | EncodingKind::WeightedAngleZ => emit_disc_angle(ops, enc, symbol.expect("symbol input"), spec.m, base),
        EncodingKind::FeatureAngle | EncodingKind::FeatureAngleParallel => {
            emit_features(ops, enc, spec.num_qubits, base)
        }
        EncodingKind::Qaoa => emit_qaoa(ops, enc.qaoa_layers, base),
    }
}

fn emit_core_layer(ops: &mut Vec<Op>, core: &CoreLayerSpec, num_qubits: usize, base: usize) {
    let p = |i: usize| Angle::Param { index: i, scale: 1.0 };
    for qubit in 0..num_qubits {
        match core.rotation {
            RotationKind::GeneralRot => {
                let w = base + 3 * qubit;
                // Rot(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi)
                ops.push(Op::rot(OpKind::Rz(qubit), p(w)));
                ops.push(Op::rot(OpKind::Ry(qubit), p(w + 1)));
                ops.push(Op::rot(OpKind::Rz(qubit), p(w + 2)));
            }
            RotationKind::RyOnly => ops.push(Op::rot(OpKind::Ry(qubit), p(base + qubit))),
        }
    }
    for &(c, t) in &core.entanglers {
        ops.push(Op::fixed(OpKind::Cnot(c, t)));
    }
}

fn emit_measurement(ops: &mut Vec<Op>, meas: &MeasurementSpec, base: usize) {
    for (i, qubit) in meas.weight_qubits().into_iter().enumerate() {
        ops.push(Op::rot(OpKind::Ry(qubit), Angle::Param { index: base + i, scale: 1.0 }));
    }
}

/// Compiles `spec` for one input. Symbol encodings bake the symbol into the
/// gate list; feature encodings leave features symbolic.
pub fn compile(spec: &CircuitSpec, symbol: Option<usize>) -> Result<Circuit> {
    spec.validate()?;
    if spec.takes_symbol() {
        let s = symbol.ok_or_else(|| Error::config("symbol encoding needs a symbol input"))?;
        check_symbol(s, spec.m)?;
    }
    let per_block = spec.encoding.block_params(spec.num_qubits);
    let per_layer = spec.core.rotation.params_per_qubit() * spec.num_qubits;
    let core_base = spec.core_offset();
    let mut ops = Vec::new();
    if !spec.core.reupload {
        emit_encoding(&mut ops, spec, symbol, 0);
    }
    for layer in 0..spec.core.layers {
        if spec.core.reupload {
            let block = match spec.encoding.weight_sharing {
                WeightSharing::PerLayer => layer,
                WeightSharing::Shared => 0,
            };
            emit_encoding(&mut ops, spec, symbol, block * per_block);
        }
        emit_core_layer(&mut ops, &spec.core, spec.num_qubits, core_base + layer * per_layer);
    }
    emit_measurement(&mut ops, &spec.measurement, spec.measurement_offset());
    let head = match spec.measurement.head {
        HeadKind::Expectations => Head::Expectations(spec.measurement.observables.clone()),
        HeadKind::Probabilities => Head::Probabilities(spec.measurement.subset.clone()),
    };
    let circuit = Circuit {
        num_qubits: spec.num_qubits,
        num_params: param_count(spec),
        num_features: spec.input_dim(),
        ops,
        head,
    };
    debug_assert!(circuit.validate().is_ok());
    Ok(circuit)
}

/// Compiled circuit plus the effective (pre-processed) features for `input`.
pub fn prepare(spec: &CircuitSpec, input: &CircuitInput) -> Result<(Circuit, Vec<f64>)> {
    match input {
        CircuitInput::Symbol(s) => {
            if !spec.takes_symbol() {
                return Err(Error::config("feature encoding given a symbol input"));
            }
            Ok((compile(spec, Some(*s))?, Vec::new()))
        }
        CircuitInput::Features(y) => {
            if spec.takes_symbol() {
                return Err(Error::config("symbol encoding given a feature input"));
            }
            let circuit = compile(spec, None)?;
            if y.len() != circuit.num_features {
                return Err(Error::domain(format!(
                    "input has {} features, encoding expects {}",
                    y.len(),
                    circuit.num_features
                )));
            }
            Ok((circuit, preprocess(spec.preprocess, y)))
        }
    }
}

pub fn preprocess(kind: Preprocess, y: &[f64]) -> Vec<f64> {
    match kind {
        Preprocess::None => y.to_vec(),
        Preprocess::Arctan => y.iter().map(|v| v.atan()).collect(),
    }
}

/// Elementwise derivative of [`preprocess`].
pub fn preprocess_derivative(kind: Preprocess, y: &[f64]) -> Vec<f64> {
    match kind {
        Preprocess::None => vec![1.0; y.len()],
        Preprocess::Arctan => y.iter().map(|v| 1.0 / (1.0 + v * v)).collect(),
    }
}

/// Executes `spec` on `input` with parameters `params`.
pub fn run_circuit(spec: &CircuitSpec, params: &[f64], input: &CircuitInput) -> Result<Vec<f64>> {
    let (circuit, features) = prepare(spec, input)?;
    circuit.outputs(params, &features)
}

/// X gates writing the bits of `s - 1` onto `log2(m)` qubits, qubit 0 first.
pub fn encode_basis(s: usize, m: usize) -> Result<Vec<GateOp>> {
    if !m.is_power_of_two() || m < 2 {
        return Err(Error::domain(format!("m = {m} is not a power of two >= 2")));
    }
    check_symbol(s, m)?;
    let mut ops = Vec::new();
    emit_basis(&mut ops, s, m);
    Ok(ops.iter().map(|op| op.kind.gate(0.0)).collect())
}

/// Discretized angle encoding of a symbol on two qubits.
///
/// Unweighted kinds use the angle `pi s / M`; weighted kinds use `w_i s` and
/// need 2 weights (4 with the extra `R_Z` factors).
pub fn encode_disc_angle(
    s: usize,
    m: usize,
    weighted: bool,
    with_z: bool,
    axes: [Axis; 2],
    w: &[f64],
) -> Result<Vec<GateOp>> {
    check_symbol(s, m)?;
    let kind = match (weighted, with_z) {
        (false, false) => EncodingKind::DiscAngle,
        (false, true) => EncodingKind::DiscAngleZ,
        (true, false) => EncodingKind::WeightedAngle,
        (true, true) => EncodingKind::WeightedAngleZ,
    };
    let enc = EncodingSpec { axes, ..EncodingSpec::new(kind) };
    let needed = enc.block_params(2);
    if w.len() != needed {
        return Err(Error::config(format!("{kind:?} needs {needed} weights, got {}", w.len())));
    }
    let mut ops = Vec::new();
    emit_disc_angle(&mut ops, &enc, s, m, 0);
    Ok(bind_ops(&ops, w, &[]))
}

/// Angle encoding of a real feature vector. `w` holds one weight per encoded
/// rotation when `enc.weighted` is set and is ignored otherwise.
pub fn encode_features(y: &[f64], enc: &EncodingSpec, num_qubits: usize, w: &[f64]) -> Result<Vec<GateOp>> {
    if !matches!(enc.kind, EncodingKind::FeatureAngle | EncodingKind::FeatureAngleParallel) {
        return Err(Error::config(format!("{:?} is not a feature-angle encoding", enc.kind)));
    }
    let d = enc.feature_count(num_qubits);
    if y.len() != d {
        return Err(Error::domain(format!("expected {d} features, got {}", y.len())));
    }
    let copies = if enc.kind == EncodingKind::FeatureAngleParallel { 2 } else { 1 };
    if copies * d > num_qubits || (copies == 2 && num_qubits < 4) {
        return Err(Error::config(format!("{} qubits cannot hold {copies} copies of {d} features", num_qubits)));
    }
    let needed = enc.block_params(num_qubits);
    if w.len() != needed {
        return Err(Error::config(format!("encoding needs {needed} weights, got {}", w.len())));
    }
    let mut ops = Vec::new();
    emit_features(&mut ops, enc, num_qubits, 0);
    Ok(bind_ops(&ops, w, y))
}

/// QAOA-style embedding of two features; `weights` holds 3 values per layer
/// `(zz, ry_0, ry_1)`.
pub fn encode_qaoa(y: &[f64], weights: &[f64]) -> Result<Vec<GateOp>> {
    if y.len() != 2 {
        return Err(Error::domain(format!("qaoa embedding takes 2 features, got {}", y.len())));
    }
    if weights.is_empty() || weights.len() % 3 != 0 {
        return Err(Error::config(format!(
            "qaoa weights must come in triples (zz, ry, ry), got {}",
            weights.len()
        )));
    }
    let mut ops = Vec::new();
    emit_qaoa(&mut ops, weights.len() / 3, 0);
    Ok(bind_ops(&ops, weights, y))
}

/// One or more core layers. `weights` is laid out layer by layer, qubit by
/// qubit, with 3 angles per qubit for `general_rot` and 1 for `ry_only`.
/// Encoding re-uploads are not included; see [`compile`].
pub fn core_layer(core: &CoreLayerSpec, num_qubits: usize, weights: &[f64]) -> Result<Vec<GateOp>> {
    let per_layer = core.rotation.params_per_qubit() * num_qubits;
    if core.layers == 0 || weights.len() != core.layers * per_layer {
        return Err(Error::config(format!(
            "{} layer(s) of {:?} on {num_qubits} qubits need {} weights, got {}",
            core.layers,
            core.rotation,
            core.layers * per_layer,
            weights.len()
        )));
    }
    for &(c, t) in &core.entanglers {
        if c >= num_qubits || t >= num_qubits || c == t {
            return Err(Error::config(format!("invalid entangler pair ({c}, {t})")));
        }
    }
    let mut ops = Vec::new();
    for layer in 0..core.layers {
        emit_core_layer(&mut ops, core, num_qubits, layer * per_layer);
    }
    Ok(bind_ops(&ops, weights, &[]))
}

fn bind_ops(ops: &[Op], params: &[f64], features: &[f64]) -> Vec<GateOp> {
    ops.iter()
        .map(|op| op.kind.gate(op.angle.map_or(0.0, |a| a.value(params, features))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::new_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn run_gates(k: usize, gates: &[GateOp]) -> StateVector {
        let mut s = new_state(k).unwrap();
        for g in gates {
            s.apply(g).unwrap();
        }
        s
    }

    pub(crate) fn qc1_encoder() -> CircuitSpec {
        CircuitSpec {
            num_qubits: 2,
            encoding: EncodingSpec::new(EncodingKind::Basis),
            core: CoreLayerSpec {
                rotation: RotationKind::GeneralRot,
                entanglers: vec![(0, 1)],
                layers: 1,
                reupload: false,
            },
            measurement: MeasurementSpec::local_z(),
            preprocess: Preprocess::None,
            m: 4,
        }
    }

    fn cq1_decoder() -> CircuitSpec {
        CircuitSpec {
            num_qubits: 2,
            encoding: EncodingSpec::new(EncodingKind::FeatureAngle).weighted(),
            core: CoreLayerSpec {
                rotation: RotationKind::GeneralRot,
                entanglers: vec![(0, 1)],
                layers: 1,
                reupload: false,
            },
            measurement: MeasurementSpec::probabilities(vec![0, 1]),
            preprocess: Preprocess::None,
            m: 4,
        }
    }

    #[test]
    fn basis_encoding_gates() {
        assert!(encode_basis(1, 4).unwrap().is_empty());
        assert_eq!(encode_basis(3, 4).unwrap(), vec![GateOp::X { qubit: 0 }]);
        let s = run_gates(2, &encode_basis(3, 4).unwrap());
        assert_eq!(s.probabilities(&[0, 1]).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        let all: Vec<GateOp> = (0..4).map(|qubit| GateOp::X { qubit }).collect();
        assert_eq!(encode_basis(16, 16).unwrap(), all);
        assert!(matches!(encode_basis(0, 4), Err(Error::Domain(_))));
        assert!(matches!(encode_basis(5, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn disc_angle_examples() {
        let g = encode_disc_angle(2, 4, false, false, [Axis::Y, Axis::Y], &[]).unwrap();
        assert_eq!(g, vec![GateOp::Ry { qubit: 0, theta: FRAC_PI_2 }, GateOp::Ry { qubit: 1, theta: FRAC_PI_2 }]);
        let g = encode_disc_angle(8, 16, false, false, [Axis::X, Axis::Y], &[]).unwrap();
        assert_eq!(g, vec![GateOp::Rx { qubit: 0, theta: FRAC_PI_2 }, GateOp::Ry { qubit: 1, theta: FRAC_PI_2 }]);
        for s in 1..=4 {
            let g = encode_disc_angle(s, 4, true, false, [Axis::Y, Axis::Y], &[0.0, 0.0]).unwrap();
            let st = run_gates(2, &g);
            assert!((st.amplitudes()[0].re - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            encode_disc_angle(1, 4, true, true, [Axis::Y, Axis::Y], &[1.0, 2.0]),
            Err(Error::Config(_))
        ));
        let z = encode_disc_angle(3, 4, true, true, [Axis::Y, Axis::X], &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(
            z,
            vec![
                GateOp::Ry { qubit: 0, theta: 0.2 * 3.0 },
                GateOp::Rz { qubit: 0, theta: 0.1 * 3.0 },
                GateOp::Rx { qubit: 1, theta: 0.4 * 3.0 },
                GateOp::Rz { qubit: 1, theta: 0.3 * 3.0 },
            ]
        );
    }

    #[test]
    fn feature_encoding_examples() {
        let enc = EncodingSpec::new(EncodingKind::FeatureAngle).weighted();
        let id = run_gates(2, &encode_features(&[0.0, 0.0], &enc, 2, &[0.7, -1.3]).unwrap());
        assert!((id.amplitudes()[0].re - 1.0).abs() < 1e-12);
        let s = run_gates(2, &encode_features(&[PI, 0.0], &enc, 2, &[1.0, 1.0]).unwrap());
        assert!((s.expectation(&PauliWord::z(0)).unwrap() + 1.0).abs() < 1e-12);
        assert!((s.expectation(&PauliWord::z(1)).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(encode_features(&[1.0], &enc, 2, &[1.0, 1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn parallel_with_zero_copy_weights_matches_single() {
        let par = EncodingSpec { features: Some(2), ..EncodingSpec::new(EncodingKind::FeatureAngleParallel).weighted() };
        let single = EncodingSpec { features: Some(2), ..EncodingSpec::new(EncodingKind::FeatureAngle).weighted() };
        let y = [0.4, -1.1];
        let a = run_gates(4, &encode_features(&y, &par, 4, &[0.9, 1.7, 0.0, 0.0]).unwrap());
        let b = run_gates(4, &encode_features(&y, &single, 4, &[0.9, 1.7]).unwrap());
        for (x, z) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - z).norm() < 1e-12);
        }
        // parallel encoding on 2 qubits is rejected
        assert!(encode_features(&y, &par, 2, &[1.0; 4]).is_err());
    }

    #[test]
    fn qaoa_examples() {
        let id = run_gates(2, &encode_qaoa(&[0.0, 0.0], &[0.0, 0.0, 0.0]).unwrap());
        assert!((id.amplitudes()[0].re - 1.0).abs() < 1e-12);
        let flip = run_gates(2, &encode_qaoa(&[0.0, 0.0], &[0.0, PI, PI]).unwrap());
        assert!((flip.probabilities(&[0, 1]).unwrap()[3] - 1.0).abs() < 1e-12);
        assert!(matches!(encode_qaoa(&[0.0, 0.0], &[1.0, 2.0]), Err(Error::Config(_))));
        // layer structure: load, ZZ, RY, RY, final load
        let g = encode_qaoa(&[0.1, 0.2], &[0.3, 0.4, 0.5]).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g[2], GateOp::Zz { a: 0, b: 1, theta: 0.3 });
        assert_eq!(g[6], GateOp::Rx { qubit: 1, theta: 0.2 });
    }

    #[test]
    fn core_layer_shapes() {
        let no_ent = CoreLayerSpec { rotation: RotationKind::GeneralRot, entanglers: vec![], layers: 1, reupload: false };
        let g = core_layer(&no_ent, 2, &[0.1; 6]).unwrap();
        assert!(!g.iter().any(|g| matches!(g, GateOp::Cnot { .. })));
        let ent = CoreLayerSpec { entanglers: vec![(0, 1)], ..no_ent.clone() };
        let g = core_layer(&ent, 2, &[0.1; 6]).unwrap();
        assert_eq!(g.iter().filter(|g| matches!(g, GateOp::Cnot { .. })).count(), 1);
        assert!(matches!(core_layer(&ent, 2, &[0.1; 5]), Err(Error::Config(_))));
        let ry = CoreLayerSpec { rotation: RotationKind::RyOnly, entanglers: vec![], layers: 16, reupload: false };
        assert!(core_layer(&ry, 4, &[0.0; 64]).is_ok());
        assert!(core_layer(&ry, 4, &[0.0; 63]).is_err());
    }

    #[test]
    fn fixture_param_counts() {
        assert_eq!(param_count(&qc1_encoder()), 6);
        assert_eq!(param_count(&cq1_decoder()), 8);
    }

    #[test]
    fn qc1_identity_core_outputs_ones() {
        let out = run_circuit(&qc1_encoder(), &[0.0; 6], &CircuitInput::Symbol(1)).unwrap();
        assert!((out[0] - 1.0).abs() < 1e-12 && (out[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_encoding_with_identity_core_is_a_permutation() {
        for s in 1..=4 {
            let mut spec = qc1_encoder();
            spec.core.entanglers.clear();
            spec.measurement = MeasurementSpec::probabilities(vec![0, 1]);
            let p = run_circuit(&spec, &[0.0; 6], &CircuitInput::Symbol(s)).unwrap();
            assert!((p[s - 1] - 1.0).abs() < 1e-12, "s={s}: {p:?}");
        }
    }

    #[test]
    fn zero_encoding_weights_decouple_input() {
        let spec = cq1_decoder();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut params = init_params(&spec, &mut rng);
        params[0] = 0.0;
        params[1] = 0.0;
        let bare = run_circuit(&spec, &params, &CircuitInput::Features(vec![0.0, 0.0])).unwrap();
        for _ in 0..20 {
            let y = vec![rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0];
            let p = run_circuit(&spec, &params, &CircuitInput::Features(y)).unwrap();
            for (a, b) in p.iter().zip(&bare) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reupload_single_layer_equals_plain() {
        let mut spec = cq1_decoder();
        let plain = compile(&spec, None).unwrap();
        spec.core.reupload = true;
        assert_eq!(compile(&spec, None).unwrap(), plain);
    }

    #[test]
    fn layout_matches_compiled_usage() {
        let mut spec = cq1_decoder();
        spec.num_qubits = 4;
        spec.core.layers = 3;
        spec.core.reupload = true;
        spec.measurement = MeasurementSpec::probabilities(vec![0, 1]).with_weights();
        let c = compile(&spec, None).unwrap();
        let layout = param_layout(&spec);
        assert_eq!(layout.len(), param_count(&spec));
        let mut used = vec![false; layout.len()];
        for op in &c.ops {
            if let Some((i, _)) = op.angle.and_then(|a| a.param_derivative(&[1.0; 4])) {
                used[i] = true;
            }
        }
        assert!(used.iter().all(|&u| u), "unused parameter slot");
        assert_eq!(layout.iter().filter(|s| s.role == ParamRole::EncodingWeight).count(), 12);
        assert_eq!(layout.iter().filter(|s| s.role == ParamRole::MeasurementWeight).count(), 2);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = cq1_decoder();
        spec.measurement = MeasurementSpec::probabilities(vec![0]);
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
        let mut spec = cq1_decoder();
        spec.core.entanglers = vec![(0, 2)];
        assert!(spec.validate().is_err());
        let mut spec = qc1_encoder();
        spec.preprocess = Preprocess::Arctan;
        assert!(spec.validate().is_err());
        let mut spec = qc1_encoder();
        spec.core.layers = 0;
        assert!(spec.validate().is_err());
        assert!(matches!(
            run_circuit(&qc1_encoder(), &[0.0; 6], &CircuitInput::Features(vec![0.0, 0.0])),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            run_circuit(&qc1_encoder(), &[0.0; 5], &CircuitInput::Symbol(1)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn non_rotation_with_angle_is_unsupported() {
        let c = Circuit {
            num_qubits: 1,
            num_params: 1,
            num_features: 0,
            ops: vec![Op { kind: OpKind::X(0), angle: Some(Angle::Param { index: 0, scale: 1.0 }) }],
            head: Head::Expectations(vec![PauliWord::z(0)]),
        };
        assert!(matches!(c.validate(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn circuit_spec_json_round_trip() {
        let spec = cq1_decoder();
        let json = serde_json::to_string_pretty(&spec).unwrap();
        assert!(json.contains("\"kind\": \"feature_angle\""));
        let back: CircuitSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
