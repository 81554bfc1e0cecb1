//! Multilayer-perceptron inspection policy: observation construction, forward
//! inference and a portable weights format.
//!
//! # Weights format
//!
//! Text encoding, one item per line, single spaces, `\n` endings:
//!
//! ```text
//! rta-policy 1
//! variant no-sensors
//! sizes 6 256 256 6
//! activations tanh tanh linear
//! layer 0
//! w <in values>        (one line per output row)
//! b <out values>
//! layer 1
//! ...
//! ```
//!
//! Values are written in shortest round-trip exponent form, so a saved file
//! parses back to identical bits. The binary encoding carries the same header
//! fields followed by little-endian `f64` arrays (weights row-major, then bias).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{Control3, CwParams, State6, SunState};
use crate::error::PolicyError;
use crate::inspection::InspectionSummary;

pub const HIDDEN_WIDTH: usize = 256;
pub const OUTPUT_WIDTH: usize = 6;
pub const MAX_OBSERVATION: usize = 11;

const TEXT_MAGIC: &str = "rta-policy 1";
const BINARY_MAGIC: &[u8; 8] = b"RTAPOL\x00\x01";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservationVariant {
    /// `[x, y, z, vx, vy, vz]`
    NoSensors,
    /// `[x, y, z, vx, vy, vz, n_points, θ, x_ups, y_ups, z_ups]`
    AllSensors,
}

impl ObservationVariant {
    pub fn width(&self) -> usize {
        match self {
            ObservationVariant::NoSensors => 6,
            ObservationVariant::AllSensors => 11,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ObservationVariant::NoSensors => "no-sensors",
            ObservationVariant::AllSensors => "all-sensors",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "no-sensors" | "no_sensors" => Some(ObservationVariant::NoSensors),
            "all-sensors" | "all_sensors" => Some(ObservationVariant::AllSensors),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn tag(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
        }
    }

    fn code(&self) -> u8 {
        match self {
            Activation::Tanh => 1,
            Activation::Linear => 0,
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "tanh" => Some(Activation::Tanh),
            "linear" => Some(Activation::Linear),
            _ => None,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Activation::Tanh),
            0 => Some(Activation::Linear),
            _ => None,
        }
    }
}

/// Dense layer `y = act(W x + b)` with `W` stored row-major (`outputs × inputs`).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Self {
        Self {
            inputs,
            outputs,
            weights,
            bias,
            activation,
        }
    }

    fn apply(&self, input: &[f64], output: &mut Vec<f64>) {
        output.clear();
        for (row, &b) in self.weights.chunks_exact(self.inputs).zip(&self.bias) {
            let z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b;
            output.push(match self.activation {
                Activation::Tanh => z.tanh(),
                Activation::Linear => z,
            });
        }
        if self.activation == Activation::Tanh {
            debug_assert!(output.iter().all(|a| (-1.0..=1.0).contains(a)));
        }
    }
}

/// Reusable activation buffers for allocation-free inference.
#[derive(Debug, Default, Clone)]
pub struct PolicyScratch {
    front: Vec<f64>,
    back: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNetwork {
    /// Observation variant the network was built for, or `None` for a custom shape.
    pub variant: Option<ObservationVariant>,
    pub layers: Vec<Layer>,
}

/// Mean and variance parameters of the stochastic action head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionDistributionParams {
    pub mean: Control3,
    pub variance: Control3,
}

impl PolicyNetwork {
    /// Validate the dimension chain and parameters.
    pub fn new(
        variant: Option<ObservationVariant>,
        layers: Vec<Layer>,
    ) -> Result<Self, PolicyError> {
        if layers.is_empty() {
            return Err(PolicyError::Schema {
                line: 0,
                message: "network has no layers".into(),
            });
        }
        if let Some(v) = variant {
            if layers[0].inputs != v.width() {
                return Err(PolicyError::DimensionMismatch {
                    layer: 0,
                    expected: v.width(),
                    found: layers[0].inputs,
                });
            }
        }
        for (i, layer) in layers.iter().enumerate() {
            if i > 0 && layer.inputs != layers[i - 1].outputs {
                return Err(PolicyError::DimensionMismatch {
                    layer: i,
                    expected: layers[i - 1].outputs,
                    found: layer.inputs,
                });
            }
            if layer.weights.len() != layer.inputs * layer.outputs {
                return Err(PolicyError::DimensionMismatch {
                    layer: i,
                    expected: layer.inputs * layer.outputs,
                    found: layer.weights.len(),
                });
            }
            if layer.bias.len() != layer.outputs {
                return Err(PolicyError::DimensionMismatch {
                    layer: i,
                    expected: layer.outputs,
                    found: layer.bias.len(),
                });
            }
            if let Some(index) = layer
                .weights
                .iter()
                .chain(&layer.bias)
                .position(|w| !w.is_finite())
            {
                return Err(PolicyError::NonFinite { layer: i, index });
            }
        }
        Ok(Self { variant, layers })
    }

    /// The two-hidden-layer tanh architecture with seeded uniform
    /// `±1/√fan_in` weights.
    pub fn seeded(variant: ObservationVariant, seed: u64) -> Self {
        let sizes = [variant.width(), HIDDEN_WIDTH, HIDDEN_WIDTH, OUTPUT_WIDTH];
        let acts = [Activation::Tanh, Activation::Tanh, Activation::Linear];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .zip(acts)
            .map(|(w, act)| {
                let (inputs, outputs) = (w[0], w[1]);
                let bound = 1.0 / (inputs as f64).sqrt();
                let weights = (0..inputs * outputs)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect();
                let bias = (0..outputs)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect();
                Layer::new(inputs, outputs, weights, bias, act)
            })
            .collect();
        Self::new(Some(variant), layers).expect("seeded architecture is consistent")
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    /// Raw network output using caller-provided buffers.
    pub fn evaluate_with<'s>(
        &self,
        input: &[f64],
        scratch: &'s mut PolicyScratch,
    ) -> Result<&'s [f64], PolicyError> {
        if input.len() != self.input_width() {
            return Err(PolicyError::InputLength {
                expected: self.input_width(),
                found: input.len(),
            });
        }
        scratch.front.clear();
        scratch.front.extend_from_slice(input);
        for layer in &self.layers {
            layer.apply(&scratch.front, &mut scratch.back);
            std::mem::swap(&mut scratch.front, &mut scratch.back);
        }
        Ok(&scratch.front)
    }

    pub fn evaluate(&self, input: &[f64]) -> Result<Vec<f64>, PolicyError> {
        let mut scratch = PolicyScratch::default();
        self.evaluate_with(input, &mut scratch).map(<[f64]>::to_vec)
    }

    pub fn forward_with(
        &self,
        obs: &[f64],
        scratch: &mut PolicyScratch,
    ) -> Result<ActionDistributionParams, PolicyError> {
        if self.output_width() != OUTPUT_WIDTH {
            return Err(PolicyError::DimensionMismatch {
                layer: self.layers.len() - 1,
                expected: OUTPUT_WIDTH,
                found: self.output_width(),
            });
        }
        let out = self.evaluate_with(obs, scratch)?;
        Ok(ActionDistributionParams {
            mean: Control3::new(out[0], out[1], out[2]),
            variance: Control3::new(out[3], out[4], out[5]),
        })
    }

    pub fn forward(&self, obs: &Observation) -> Result<ActionDistributionParams, PolicyError> {
        self.forward_with(obs.as_slice(), &mut PolicyScratch::default())
    }

    /// Deterministic action: the distribution mean clamped to the thrust box.
    pub fn act_with(
        &self,
        obs: &[f64],
        cw: &CwParams,
        scratch: &mut PolicyScratch,
    ) -> Result<Control3, PolicyError> {
        Ok(cw.clamp_control(&self.forward_with(obs, scratch)?.mean))
    }

    pub fn act(&self, obs: &Observation, cw: &CwParams) -> Result<Control3, PolicyError> {
        self.act_with(obs.as_slice(), cw, &mut PolicyScratch::default())
    }

    fn header(&self) -> (String, Vec<usize>) {
        let variant = self.variant.map_or("custom", |v| v.as_str()).to_string();
        let mut sizes = vec![self.input_width()];
        sizes.extend(self.layers.iter().map(|l| l.outputs));
        (variant, sizes)
    }

    pub fn to_text(&self) -> String {
        let (variant, sizes) = self.header();
        let mut out = String::new();
        out.push_str(TEXT_MAGIC);
        out.push('\n');
        let _ = writeln!(out, "variant {variant}");
        let sizes: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "sizes {}", sizes.join(" "));
        let acts: Vec<&str> = self.layers.iter().map(|l| l.activation.tag()).collect();
        let _ = writeln!(out, "activations {}", acts.join(" "));
        for (i, layer) in self.layers.iter().enumerate() {
            let _ = writeln!(out, "layer {i}");
            for row in layer.weights.chunks_exact(layer.inputs) {
                out.push('w');
                for w in row {
                    let _ = write!(out, " {w:e}");
                }
                out.push('\n');
            }
            out.push('b');
            for b in &layer.bias {
                let _ = write!(out, " {b:e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, PolicyError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| PolicyError::Schema {
                line: 0,
                message: format!("unexpected end of file, expected {what}"),
            })
        };
        let schema = |line: usize, message: String| PolicyError::Schema { line, message };

        let (ln, magic) = next("header")?;
        if magic != TEXT_MAGIC {
            return Err(schema(ln, format!("expected `{TEXT_MAGIC}`")));
        }
        let (ln, line) = next("variant")?;
        let variant = match line.strip_prefix("variant ") {
            Some("custom") => None,
            Some(v) => Some(
                ObservationVariant::parse(v)
                    .ok_or_else(|| schema(ln, format!("unknown variant `{v}`")))?,
            ),
            None => return Err(schema(ln, "expected `variant`".into())),
        };
        let (ln, line) = next("sizes")?;
        let sizes: Vec<usize> = line
            .strip_prefix("sizes ")
            .ok_or_else(|| schema(ln, "expected `sizes`".into()))?
            .split(' ')
            .map(|s| s.parse().map_err(|_| schema(ln, format!("bad size `{s}`"))))
            .collect::<Result<_, _>>()?;
        if sizes.len() < 2 {
            return Err(schema(ln, "need at least two sizes".into()));
        }
        let (ln, line) = next("activations")?;
        let acts: Vec<Activation> = line
            .strip_prefix("activations ")
            .ok_or_else(|| schema(ln, "expected `activations`".into()))?
            .split(' ')
            .map(|s| {
                Activation::from_tag(s)
                    .ok_or_else(|| schema(ln, format!("unknown activation `{s}`")))
            })
            .collect::<Result<_, _>>()?;
        if acts.len() != sizes.len() - 1 {
            return Err(schema(
                ln,
                format!("{} activations for {} layers", acts.len(), sizes.len() - 1),
            ));
        }

        let parse_values = |ln: usize,
                            body: &str,
                            layer: usize,
                            expected: usize|
         -> Result<Vec<f64>, PolicyError> {
            let values: Vec<f64> = body
                .split(' ')
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| schema(ln, format!("bad number `{s}`")))
                })
                .collect::<Result<_, _>>()?;
            if values.len() != expected {
                return Err(PolicyError::DimensionMismatch {
                    layer,
                    expected,
                    found: values.len(),
                });
            }
            Ok(values)
        };

        let mut layers = Vec::with_capacity(acts.len());
        for (i, &act) in acts.iter().enumerate() {
            let (inputs, outputs) = (sizes[i], sizes[i + 1]);
            let (ln, line) = next("layer")?;
            if line != format!("layer {i}") {
                return Err(schema(ln, format!("expected `layer {i}`")));
            }
            let mut weights = Vec::with_capacity(inputs * outputs);
            for row in 0..outputs {
                let (ln, line) = next("weight row")?;
                let body = match line.strip_prefix("w ") {
                    Some(body) => body,
                    None if line.starts_with("b ") => {
                        return Err(PolicyError::DimensionMismatch {
                            layer: i,
                            expected: outputs,
                            found: row,
                        })
                    }
                    None => return Err(schema(ln, "expected weight row `w ...`".into())),
                };
                weights.extend(parse_values(ln, body, i, inputs)?);
            }
            let (ln, line) = next("bias")?;
            let body = match line.strip_prefix("b ") {
                Some(body) => body,
                None if line.starts_with("w ") => {
                    return Err(PolicyError::DimensionMismatch {
                        layer: i,
                        expected: outputs,
                        found: outputs + 1,
                    })
                }
                None => return Err(schema(ln, "expected bias row `b ...`".into())),
            };
            let bias = parse_values(ln, body, i, outputs)?;
            layers.push(Layer::new(inputs, outputs, weights, bias, act));
        }
        if let Some((ln, line)) = lines.next() {
            if !line.is_empty() {
                return Err(schema(ln, "trailing content".into()));
            }
        }
        Self::new(variant, layers)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (_, sizes) = self.header();
        let mut out = Vec::new();
        out.extend_from_slice(BINARY_MAGIC);
        out.push(match self.variant {
            None => 0,
            Some(ObservationVariant::NoSensors) => 1,
            Some(ObservationVariant::AllSensors) => 2,
        });
        out.extend_from_slice(&(self.layers.len() as u32).to_le_bytes());
        for s in &sizes {
            out.extend_from_slice(&(*s as u32).to_le_bytes());
        }
        for layer in &self.layers {
            out.push(layer.activation.code());
        }
        for layer in &self.layers {
            for v in layer.weights.iter().chain(&layer.bias) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PolicyError> {
        let schema = |message: &str| PolicyError::Schema {
            line: 0,
            message: message.to_string(),
        };
        let mut cursor = bytes;
        let mut take = |n: usize| -> Result<&[u8], PolicyError> {
            if cursor.len() < n {
                return Err(schema("truncated binary policy"));
            }
            let (head, tail) = cursor.split_at(n);
            cursor = tail;
            Ok(head)
        };
        if take(8)? != BINARY_MAGIC {
            return Err(schema("bad binary magic"));
        }
        let variant = match take(1)?[0] {
            0 => None,
            1 => Some(ObservationVariant::NoSensors),
            2 => Some(ObservationVariant::AllSensors),
            _ => return Err(schema("unknown variant code")),
        };
        let read_u32 = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize;
        let count = read_u32(take(4)?);
        if count == 0 || count > 64 {
            return Err(schema("implausible layer count"));
        }
        let mut sizes = Vec::with_capacity(count + 1);
        for _ in 0..=count {
            sizes.push(read_u32(take(4)?));
        }
        let mut acts = Vec::with_capacity(count);
        for _ in 0..count {
            acts.push(
                Activation::from_code(take(1)?[0])
                    .ok_or_else(|| schema("unknown activation code"))?,
            );
        }
        let mut layers = Vec::with_capacity(count);
        for (i, act) in acts.into_iter().enumerate() {
            let (inputs, outputs) = (sizes[i], sizes[i + 1]);
            let mut read = |n: usize| -> Result<Vec<f64>, PolicyError> {
                let raw = take(n.checked_mul(8).ok_or_else(|| schema("layer too large"))?)?;
                Ok(raw
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect())
            };
            let weights = read(inputs * outputs)?;
            let bias = read(outputs)?;
            layers.push(Layer::new(inputs, outputs, weights, bias, act));
        }
        if !cursor.is_empty() {
            return Err(schema("trailing bytes after last layer"));
        }
        Self::new(variant, layers)
    }

    /// Load from a file; the binary encoding is recognised by its magic bytes.
    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        let bytes = fs::read(path).map_err(|source| PolicyError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if bytes.starts_with(BINARY_MAGIC) {
            Self::from_bytes(&bytes)
        } else {
            let text = String::from_utf8(bytes).map_err(|_| PolicyError::Schema {
                line: 0,
                message: "file is neither binary policy nor UTF-8 text".into(),
            })?;
            Self::from_text(&text)
        }
    }

    pub fn save_text(&self, path: &Path) -> Result<(), PolicyError> {
        fs::write(path, self.to_text()).map_err(|source| PolicyError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn save_binary(&self, path: &Path) -> Result<(), PolicyError> {
        fs::write(path, self.to_bytes()).map_err(|source| PolicyError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Normalized network input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub variant: ObservationVariant,
    values: [f64; MAX_OBSERVATION],
}

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.variant.width()]
    }
}

pub const POSITION_SCALE: f64 = 1.0 / 100.0;
pub const VELOCITY_SCALE: f64 = 2.0;
pub const POINTS_SCALE: f64 = 1.0 / 100.0;

/// Build the normalized observation: positions / 100, velocities × 2 and,
/// for all sensors, inspected count / 100, the raw sun angle and the unit
/// direction to the nearest uninspected cluster.
pub fn build_observation(
    state: &State6,
    sun: &SunState,
    inspection: Option<&InspectionSummary>,
    variant: ObservationVariant,
) -> Result<Observation, PolicyError> {
    let mut values = [0.0; MAX_OBSERVATION];
    for i in 0..3 {
        values[i] = state[i] * POSITION_SCALE;
        values[3 + i] = state[3 + i] * VELOCITY_SCALE;
    }
    if variant == ObservationVariant::AllSensors {
        let summary = inspection.ok_or(PolicyError::MissingInspection)?;
        values[6] = summary.n_points as f64 * POINTS_SCALE;
        values[7] = sun.theta();
        values[8] = summary.r_ups[0];
        values[9] = summary.r_ups[1];
        values[10] = summary.r_ups[2];
    }
    Ok(Observation { variant, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    fn zero_network(variant: ObservationVariant) -> PolicyNetwork {
        let sizes = [variant.width(), HIDDEN_WIDTH, HIDDEN_WIDTH, OUTPUT_WIDTH];
        let acts = [Activation::Tanh, Activation::Tanh, Activation::Linear];
        let layers = sizes
            .windows(2)
            .zip(acts)
            .map(|(w, a)| Layer::new(w[0], w[1], vec![0.0; w[0] * w[1]], vec![0.0; w[1]], a))
            .collect();
        PolicyNetwork::new(Some(variant), layers).unwrap()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = zero_network(ObservationVariant::NoSensors);
        let obs = build_observation(
            &State6::new(100.0, 20.0, -3.0, 0.1, 0.2, 0.3),
            &SunState::new(0.0),
            None,
            ObservationVariant::NoSensors,
        )
        .unwrap();
        let out = net.forward(&obs).unwrap();
        assert_eq!(out.mean, Control3::zeros());
        assert_eq!(out.variance, Control3::zeros());
        assert_eq!(
            net.act(&obs, &CwParams::default()).unwrap(),
            Control3::zeros()
        );
    }

    #[test]
    fn single_tanh_unit() {
        let net = PolicyNetwork::new(
            None,
            vec![Layer::new(1, 1, vec![1.0], vec![0.0], Activation::Tanh)],
        )
        .unwrap();
        let out = net.evaluate(&[0.5]).unwrap();
        assert_relative_eq!(out[0], 0.5f64.tanh());
        assert_relative_eq!(out[0], 0.462117, epsilon = 1e-6);
    }

    #[test]
    fn mean_is_clamped_to_thrust_box() {
        // linear 6→6 identity copies the observation into the outputs
        let mut w = vec![0.0; 36];
        for i in 0..6 {
            w[i * 6 + i] = 1.0;
        }
        let net = PolicyNetwork::new(
            None,
            vec![Layer::new(6, 6, w, vec![0.0; 6], Activation::Linear)],
        )
        .unwrap();
        let mut scratch = PolicyScratch::default();
        let u = net
            .act_with(
                &[5.0, -5.0, 0.3, 9.0, 9.0, 9.0],
                &CwParams::default(),
                &mut scratch,
            )
            .unwrap();
        assert_eq!(u, Control3::new(1.0, -1.0, 0.3));
    }

    #[test]
    fn observation_normalization() {
        let obs = build_observation(
            &State6::new(100.0, 0.0, 0.0, 0.5, 0.0, 0.0),
            &SunState::new(0.0),
            None,
            ObservationVariant::NoSensors,
        )
        .unwrap();
        assert_eq!(obs.as_slice(), &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);

        let summary = InspectionSummary {
            n_points: 0,
            r_ups: Vector3::x(),
        };
        let obs = build_observation(
            &State6::zeros(),
            &SunState::new(0.0),
            Some(&summary),
            ObservationVariant::AllSensors,
        )
        .unwrap();
        assert_eq!(
            obs.as_slice(),
            &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );

        let summary = InspectionSummary {
            n_points: 99,
            r_ups: Vector3::y(),
        };
        let obs = build_observation(
            &State6::zeros(),
            &SunState::new(1.25),
            Some(&summary),
            ObservationVariant::AllSensors,
        )
        .unwrap();
        assert_relative_eq!(obs.as_slice()[6], 0.99);
        assert_eq!(obs.as_slice()[7], 1.25);
    }

    #[test]
    fn all_sensors_requires_inspection_summary() {
        let err = build_observation(
            &State6::zeros(),
            &SunState::new(0.0),
            None,
            ObservationVariant::AllSensors,
        );
        assert!(matches!(err, Err(PolicyError::MissingInspection)));
    }

    #[test]
    fn input_length_is_checked() {
        let net = PolicyNetwork::seeded(ObservationVariant::AllSensors, 1);
        assert!(matches!(
            net.evaluate(&[0.0; 6]),
            Err(PolicyError::InputLength {
                expected: 11,
                found: 6
            })
        ));
    }

    #[test]
    fn seeded_network_matches_paper_architecture() {
        for variant in [
            ObservationVariant::NoSensors,
            ObservationVariant::AllSensors,
        ] {
            let net = PolicyNetwork::seeded(variant, 3);
            assert_eq!(net.layers.len(), 3);
            assert_eq!(net.input_width(), variant.width());
            assert_eq!(net.layers[0].outputs, 256);
            assert_eq!(net.layers[1].outputs, 256);
            assert_eq!(net.output_width(), 6);
            assert_eq!(net, PolicyNetwork::seeded(variant, 3));
        }
    }

    #[test]
    fn rejects_broken_chains_and_values() {
        let bad_chain = vec![
            Layer::new(6, 4, vec![0.0; 24], vec![0.0; 4], Activation::Tanh),
            Layer::new(3, 6, vec![0.0; 18], vec![0.0; 6], Activation::Linear),
        ];
        assert!(matches!(
            PolicyNetwork::new(None, bad_chain),
            Err(PolicyError::DimensionMismatch {
                layer: 1,
                expected: 4,
                found: 3
            })
        ));
        let mut w = vec![0.0; 6];
        w[2] = f64::NAN;
        assert!(matches!(
            PolicyNetwork::new(
                None,
                vec![Layer::new(6, 1, w, vec![0.0], Activation::Linear)]
            ),
            Err(PolicyError::NonFinite { layer: 0, index: 2 })
        ));
    }

    #[test]
    fn text_and_binary_round_trip() {
        let net = PolicyNetwork::seeded(ObservationVariant::NoSensors, 11);
        let text = net.to_text();
        let parsed = PolicyNetwork::from_text(&text).unwrap();
        assert_eq!(parsed, net);
        assert_eq!(parsed.to_text(), text);
        let bytes = net.to_bytes();
        let parsed = PolicyNetwork::from_bytes(&bytes).unwrap();
        assert_eq!(parsed, net);
        assert_eq!(parsed.to_bytes(), bytes);
    }
}
