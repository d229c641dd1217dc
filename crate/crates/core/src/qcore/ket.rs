use crate::rational::Rational;

use super::{ExactAmplitude, QError};

/// A normalized real state vector with exact amplitudes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ket {
    amplitudes: Vec<ExactAmplitude>,
}

impl Ket {
    /// Validates that the amplitudes have unit norm, exactly.
    pub fn new(amplitudes: Vec<ExactAmplitude>) -> Result<Self, QError> {
        if amplitudes.is_empty() {
            return Err(QError::Empty);
        }
        let norm: ExactAmplitude = amplitudes.iter().map(|x| *x * *x).sum();
        if norm != ExactAmplitude::ONE {
            return Err(QError::NotNormalized(norm.to_string()));
        }
        Ok(Ket { amplitudes })
    }

    /// Computational basis vector `|index⟩` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amplitudes = vec![ExactAmplitude::ZERO; dim];
        amplitudes[index] = ExactAmplitude::ONE;
        Ket { amplitudes }
    }

    /// Normalized `Σ cᵢ·|kᵢ⟩`. Fails when the combination is not unit norm.
    pub fn superpose(terms: &[(ExactAmplitude, &Ket)]) -> Result<Self, QError> {
        let dim = terms.first().ok_or(QError::Empty)?.1.dim();
        let mut acc = vec![ExactAmplitude::ZERO; dim];
        for (c, ket) in terms {
            if ket.dim() != dim {
                return Err(QError::DimensionMismatch { left: dim, right: ket.dim() });
            }
            for (slot, x) in acc.iter_mut().zip(&ket.amplitudes) {
                *slot = *slot + *c * *x;
            }
        }
        Ket::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[ExactAmplitude] {
        &self.amplitudes
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.amplitudes.iter().map(ExactAmplitude::to_f64).collect()
    }

    /// `self ⊗ other`; entry `i·dim(other) + j` is `selfᵢ · otherⱼ`.
    pub fn tensor(&self, other: &Ket) -> Ket {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|x| other.amplitudes.iter().map(move |y| *x * *y))
            .collect();
        Ket { amplitudes }
    }

    /// `⟨self|other⟩`. Amplitudes are real, so no conjugation is needed.
    pub fn inner(&self, other: &Ket) -> Result<ExactAmplitude, QError> {
        if self.dim() != other.dim() {
            return Err(QError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| *x * *y)
            .sum())
    }
}

pub fn tensor(a: &Ket, b: &Ket) -> Ket {
    a.tensor(b)
}

pub fn inner(a: &Ket, b: &Ket) -> Result<ExactAmplitude, QError> {
    a.inner(b)
}

/// `|⟨outcome|state⟩|²` as an exact rational.
pub fn born_probability(outcome: &Ket, state: &Ket) -> Result<Rational, QError> {
    let overlap = outcome.inner(state)?;
    overlap
        .squared_magnitude()
        .ok_or_else(|| QError::IrrationalProbability(overlap.to_string()))
}
