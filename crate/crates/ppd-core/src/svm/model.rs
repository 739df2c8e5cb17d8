use alloc::string::String;
use alloc::vec::Vec;

use super::kernel::squared_distance;
use super::{Label, SvmError};
use crate::rng::PRNG_NAME;

/// Provenance carried with a model so results can be reproduced.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMetadata {
    /// Difference levels `S` of the features, when known.
    pub levels: Option<u32>,
    pub master_seed: Option<u64>,
    pub prng: String,
    /// Ratio smoothing used by the features (`add-one`).
    pub smoothing: String,
}

impl Default for ModelMetadata {
    fn default() -> Self {
        ModelMetadata { levels: None, master_seed: None, prng: PRNG_NAME.into(), smoothing: "add-one".into() }
    }
}

/// A trained RBF-SVM: `f(x) = Σ coefᵢ·exp(−γ‖svᵢ − x‖²) + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `αᵢyᵢ` for each support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub feature_dim: usize,
    pub metadata: ModelMetadata,
}

impl SvmModel {
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, SvmError> {
        if x.len() != self.feature_dim {
            return Err(SvmError::DimensionMismatch { expected: self.feature_dim, actual: x.len() });
        }
        if self.support_vectors.is_empty() {
            return Err(SvmError::EmptyModel);
        }
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.dual_coefficients)
            .map(|(sv, &coef)| coef * libm::exp(-self.gamma * squared_distance(sv, x)))
            .sum();
        Ok(sum + self.bias)
    }
}

/// Decision value and label (zero counts as stego).
pub fn predict(model: &SvmModel, x: &[f64]) -> Result<(f64, Label), SvmError> {
    let v = model.decision_value(x)?;
    Ok((v, Label::from_decision(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toy() -> SvmModel {
        SvmModel {
            support_vectors: vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.2, 0.9]],
            dual_coefficients: vec![-0.7, 0.5, 0.2],
            bias: 0.05,
            gamma: 0.8,
            c: 1.0,
            feature_dim: 2,
            metadata: ModelMetadata::default(),
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(predict(&toy(), &[]), Err(SvmError::DimensionMismatch { expected: 2, actual: 0 }));
    }

    #[test]
    fn continuous_in_gamma() {
        let m = toy();
        let mut m2 = toy();
        m2.gamma += 1e-6;
        for x in [[0.1, 0.3], [0.9, 0.5], [0.0, 1.0]] {
            let a = m.decision_value(&x).unwrap();
            let b = m2.decision_value(&x).unwrap();
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn invariant_to_support_vector_order() {
        let m = toy();
        let mut p = toy();
        p.support_vectors.reverse();
        p.dual_coefficients.reverse();
        for x in [[0.1, 0.3], [0.9, 0.5]] {
            assert!((m.decision_value(&x).unwrap() - p.decision_value(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_decision_is_stego() {
        assert_eq!(Label::from_decision(0.0), Label::Stego);
        assert_eq!(Label::from_decision(-1e-300), Label::Cover);
    }
}
