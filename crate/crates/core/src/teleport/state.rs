use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TeleportError;

pub const NORM_TOLERANCE: f64 = 1e-12;

/// `α|0⟩ + β|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl QubitState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self, TeleportError> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(TeleportError::NotNormalized(norm));
        }
        Ok(QubitState { alpha, beta })
    }

    pub fn zero() -> Self {
        QubitState { alpha: Complex64::new(1.0, 0.0), beta: Complex64::new(0.0, 0.0) }
    }

    pub fn one() -> Self {
        QubitState { alpha: Complex64::new(0.0, 0.0), beta: Complex64::new(1.0, 0.0) }
    }

    /// Haar-random pure state: `cos θ` uniform on `[−1, 1]`, `φ` uniform on
    /// `[0, 2π)`, `α = cos(θ/2)`, `β = e^{iφ} sin(θ/2)`.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let cos_theta: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let c = ((1.0 + cos_theta) / 2.0).max(0.0).sqrt();
        let s = ((1.0 - cos_theta) / 2.0).max(0.0).sqrt();
        QubitState { alpha: Complex64::new(c, 0.0), beta: Complex64::from_polar(s, phi) }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn fidelity(&self, other: &QubitState) -> f64 {
        let overlap = self.alpha.conj() * other.alpha + self.beta.conj() * other.beta;
        overlap.norm_sqr().min(1.0)
    }
}

/// Two classical bits, written first-bit-first: `"01"` has first bit 0.
///
/// Used both for Bell-state labels `xy` and for Alice's results `ab`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Bits2(u8);

pub type BellLabel = Bits2;
pub type AliceResult = Bits2;

impl Bits2 {
    pub const ALL: [Bits2; 4] = [Bits2(0), Bits2(1), Bits2(2), Bits2(3)];

    pub fn new(first: u8, second: u8) -> Self {
        assert!(first < 2 && second < 2, "bits must be 0 or 1");
        Bits2((first << 1) | second)
    }

    /// `0..4`, i.e. the door index in a four-door teleportation game.
    pub fn from_index(i: usize) -> Self {
        assert!(i < 4, "two-bit index out of range: {i}");
        Bits2(i as u8)
    }

    pub fn index(&self) -> usize {
        usize::from(self.0)
    }

    pub fn first(&self) -> u8 {
        self.0 >> 1
    }

    pub fn second(&self) -> u8 {
        self.0 & 1
    }

    pub fn contains(&self, bit: u8) -> bool {
        self.first() == bit || self.second() == bit
    }
}

impl fmt::Display for Bits2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.first(), self.second())
    }
}

impl FromStr for Bits2 {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.as_bytes() {
            [a @ (b'0' | b'1'), b @ (b'0' | b'1')] => Ok(Bits2::new(a - b'0', b - b'0')),
            _ => Err(format!("expected two bits like `01`, got `{s}`")),
        }
    }
}

impl TryFrom<String> for Bits2 {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Bits2> for String {
    fn from(b: Bits2) -> String {
        b.to_string()
    }
}

/// Single-qubit operator Bob applies. `ZX` means `σ_z σ_x` (X first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrectionOp {
    I,
    X,
    Z,
    ZX,
    #[serde(rename = "negI")]
    NegI,
    #[serde(rename = "negX")]
    NegX,
    #[serde(rename = "negZ")]
    NegZ,
    #[serde(rename = "negZX")]
    NegZX,
}

impl CorrectionOp {
    pub const ALL: [CorrectionOp; 8] = [
        CorrectionOp::I,
        CorrectionOp::X,
        CorrectionOp::Z,
        CorrectionOp::ZX,
        CorrectionOp::NegI,
        CorrectionOp::NegX,
        CorrectionOp::NegZ,
        CorrectionOp::NegZX,
    ];

    /// Real 2×2 matrix, row-major.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (m, sign) = match self {
            CorrectionOp::I => ([[1.0, 0.0], [0.0, 1.0]], 1.0),
            CorrectionOp::X => ([[0.0, 1.0], [1.0, 0.0]], 1.0),
            CorrectionOp::Z => ([[1.0, 0.0], [0.0, -1.0]], 1.0),
            CorrectionOp::ZX => ([[0.0, 1.0], [-1.0, 0.0]], 1.0),
            CorrectionOp::NegI => ([[1.0, 0.0], [0.0, 1.0]], -1.0),
            CorrectionOp::NegX => ([[0.0, 1.0], [1.0, 0.0]], -1.0),
            CorrectionOp::NegZ => ([[1.0, 0.0], [0.0, -1.0]], -1.0),
            CorrectionOp::NegZX => ([[0.0, 1.0], [-1.0, 0.0]], -1.0),
        };
        m.map(|row| row.map(|x| x * sign))
    }

    pub fn apply(&self, s: &QubitState) -> QubitState {
        let m = self.matrix();
        QubitState {
            alpha: s.alpha * m[0][0] + s.beta * m[0][1],
            beta: s.alpha * m[1][0] + s.beta * m[1][1],
        }
    }
}

impl fmt::Display for CorrectionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrectionOp::I => "I",
            CorrectionOp::X => "X",
            CorrectionOp::Z => "Z",
            CorrectionOp::ZX => "ZX",
            CorrectionOp::NegI => "-I",
            CorrectionOp::NegX => "-X",
            CorrectionOp::NegZ => "-Z",
            CorrectionOp::NegZX => "-ZX",
        })
    }
}

/// Operator that turns Bob's post-measurement qubit back into the input,
/// including sign.
///
/// Rows are Bell labels `00, 01, 10, 11`; columns are Alice's results in
/// the same order.
const CORRECTIONS: [[CorrectionOp; 4]; 4] = {
    use CorrectionOp::*;
    [
        [I, X, Z, ZX],
        [X, I, ZX, Z],
        [Z, NegZX, I, NegX],
        [ZX, NegZ, X, NegI],
    ]
};

pub fn correction_for(bell: BellLabel, alice_result: AliceResult) -> CorrectionOp {
    CORRECTIONS[bell.index()][alice_result.index()]
}

/// One measurement branch of the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Branch {
    pub alice_result: AliceResult,
    pub probability: f64,
    /// Bob's normalized qubit before any correction.
    pub bob_state: QubitState,
}

/// `(|0⟩|y⟩ + (−1)^x |1⟩|ȳ⟩)/√2` as four amplitudes indexed `2·q_A + q_B`.
pub fn bell_state(bell: BellLabel) -> [Complex64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let y = usize::from(bell.second());
    let sign = if bell.first() == 0 { 1.0 } else { -1.0 };
    let mut v = [Complex64::new(0.0, 0.0); 4];
    v[y] = Complex64::new(s, 0.0);
    v[2 + (1 - y)] = Complex64::new(sign * s, 0.0);
    v
}

/// Prepares `ψ ⊗ β_xy`, applies CNOT (input qubit controls Alice's half)
/// then a Hadamard on the input qubit, and splits on Alice's two bits.
///
/// Qubit order is (input, Alice, Bob); basis index `4·q0 + 2·q1 + q2`.
pub fn teleport_step(input: &QubitState, bell: BellLabel) -> Result<[Branch; 4], TeleportError> {
    let norm = input.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(TeleportError::NotNormalized(norm));
    }
    let pair = bell_state(bell);
    let mut amp = [Complex64::new(0.0, 0.0); 8];
    for (q0, c) in [input.alpha, input.beta].into_iter().enumerate() {
        for (rest, p) in pair.iter().enumerate() {
            amp[4 * q0 + rest] = c * p;
        }
    }
    // CNOT: flip q1 where q0 = 1.
    amp.swap(4, 6);
    amp.swap(5, 7);
    // Hadamard on q0.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for rest in 0..4 {
        let (a0, a1) = (amp[rest], amp[4 + rest]);
        amp[rest] = (a0 + a1) * h;
        amp[4 + rest] = (a0 - a1) * h;
    }

    Ok(Bits2::ALL.map(|ab| {
        let base = 2 * ab.index();
        let (b0, b1) = (amp[base], amp[base + 1]);
        let probability = b0.norm_sqr() + b1.norm_sqr();
        let scale = probability.sqrt();
        Branch {
            alice_result: ab,
            probability,
            bob_state: QubitState { alpha: b0 / scale, beta: b1 / scale },
        }
    }))
}
