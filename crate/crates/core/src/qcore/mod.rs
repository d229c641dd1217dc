//! Exact two-qubit kernel for the PBR construction.
//!
//! Every amplitude of the four product preparations and the entangled
//! measurement basis lies in `ℚ(√2)`, and every Born probability between
//! them is rational, so nothing here touches floating point.

mod amplitude;
mod ket;

use serde::Serialize;
use thiserror::Error;

use crate::rational::{self, Rational};

pub use amplitude::ExactAmplitude;
pub use ket::{born_probability, inner, tensor, Ket};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("length mismatch: {states} states vs {basis} basis vectors")]
    LengthMismatch { states: usize, basis: usize },
    #[error("vector is not normalized (squared norm {0})")]
    NotNormalized(String),
    #[error("empty vector")]
    Empty,
    #[error("overlap {0} has an irrational square")]
    IrrationalProbability(String),
}

pub fn ket_zero() -> Ket {
    Ket::basis(2, 0)
}

pub fn ket_one() -> Ket {
    Ket::basis(2, 1)
}

/// `(|0⟩ + |1⟩)/√2`
pub fn ket_plus() -> Ket {
    let s = ExactAmplitude::FRAC_1_SQRT_2;
    Ket::new(vec![s, s]).expect("|+> is normalized")
}

/// `(|0⟩ − |1⟩)/√2`
pub fn ket_minus() -> Ket {
    let s = ExactAmplitude::FRAC_1_SQRT_2;
    Ket::new(vec![s, -s]).expect("|-> is normalized")
}

/// The four product preparations `|0⟩|0⟩, |0⟩|+⟩, |+⟩|0⟩, |+⟩|+⟩`, in that order.
pub fn pbr_states() -> Vec<Ket> {
    let (zero, plus) = (ket_zero(), ket_plus());
    vec![
        zero.tensor(&zero),
        zero.tensor(&plus),
        plus.tensor(&zero),
        plus.tensor(&plus),
    ]
}

/// The entangled measurement basis. Outcome `i` never fires on preparation `i`.
pub fn pbr_basis() -> Vec<Ket> {
    let (zero, one, plus, minus) = (ket_zero(), ket_one(), ket_plus(), ket_minus());
    let pair = |a: &Ket, b: &Ket, c: &Ket, d: &Ket| {
        let s = ExactAmplitude::FRAC_1_SQRT_2;
        Ket::superpose(&[(s, &a.tensor(b)), (s, &c.tensor(d))])
            .expect("PBR basis vectors are normalized")
    };
    vec![
        pair(&zero, &one, &one, &zero),
        pair(&zero, &minus, &one, &plus),
        pair(&plus, &one, &minus, &zero),
        pair(&plus, &minus, &minus, &plus),
    ]
}

/// Born probabilities indexed `[state][outcome]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbabilityTable {
    #[serde(serialize_with = "serialize_rows")]
    rows: Vec<Vec<Rational>>,
}

fn serialize_rows<S: serde::Serializer>(rows: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
    let wire: Vec<Vec<rational::ExactValue>> = rows
        .iter()
        .map(|r| r.iter().map(rational::ExactValue::from).collect())
        .collect();
    wire.serialize(s)
}

impl ProbabilityTable {
    pub fn new(rows: Vec<Vec<Rational>>) -> Self {
        ProbabilityTable { rows }
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    /// Entry for preparation `state` and outcome `outcome`, both 0-based.
    pub fn get(&self, state: usize, outcome: usize) -> &Rational {
        &self.rows[state][outcome]
    }

    pub fn row(&self, state: usize) -> &[Rational] {
        &self.rows[state]
    }

    /// Human-readable list of every broken table invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut expected = vec![
            rational::zero(),
            rational::ratio(1, 4),
            rational::ratio(1, 4),
            rational::ratio(1, 2),
        ];
        expected.sort();
        for (h, row) in self.rows.iter().enumerate() {
            let sum: Rational = row.iter().sum();
            if sum != rational::one() {
                out.push(format!("row {} sums to {}", h + 1, rational::fraction_string(&sum)));
            }
            if row.get(h).is_some_and(|d| *d != rational::zero()) {
                out.push(format!("diagonal entry {} is nonzero", h + 1));
            }
            let mut sorted = row.clone();
            sorted.sort();
            if sorted != expected {
                out.push(format!("row {} is not a permutation of (0, 1/4, 1/4, 1/2)", h + 1));
            }
        }
        out
    }
}

/// `|⟨Φᵢ|Ψₕ⟩|²` for all sixteen pairs.
pub fn born_matrix() -> ProbabilityTable {
    let states = pbr_states();
    let basis = pbr_basis();
    let rows = states
        .iter()
        .map(|psi| {
            basis
                .iter()
                .map(|phi| born_probability(phi, psi).expect("PBR overlaps are rational"))
                .collect()
        })
        .collect();
    ProbabilityTable::new(rows)
}

/// True iff outcome `i` has zero probability on preparation `i` for every `i`.
pub fn is_antidistinguishable(states: &[Ket], basis: &[Ket]) -> Result<bool, QError> {
    if states.len() != basis.len() {
        return Err(QError::LengthMismatch { states: states.len(), basis: basis.len() });
    }
    for (psi, phi) in states.iter().zip(basis) {
        if !phi.inner(psi)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
