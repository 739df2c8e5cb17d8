//! Binary soft-margin SVM with a Gaussian kernel.
//!
//! Training solves the dual with SMO using second-order working-set selection and a
//! precomputed kernel matrix, which suits the few hundred to few thousand samples of a
//! steganalysis corpus. Hyperparameters come from stratified k-fold cross-validation
//! over a multiplicative `(C, γ)` grid.

use alloc::string::String;
use alloc::vec::Vec;

mod grid;
mod kernel;
mod model;
mod smo;

pub use grid::{
    assign_folds, cell_accuracy, cv_accuracy, grid_search, prepare_cv, select_best, CvData, GridCell, GridResult, GridSpec,
};
pub use kernel::{kernel_matrix, rbf_kernel, squared_distance, SquaredDistances};
pub use model::{predict, ModelMetadata, SvmModel};
pub use smo::{audit_kkt, dual_objective, solve_dual, train_smo, DualSolution, KktReport, SmoOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmError {
    #[error("feature length mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("training data must contain both cover and stego samples")]
    SingleClass,
    #[error("hyperparameters must be positive and finite (C={c}, gamma={gamma})")]
    InvalidHyperparameters { c: f64, gamma: f64 },
    #[error("SMO did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("trained model fails the KKT audit (violation {violation:.3e})")]
    KktViolation { violation: f64 },
    #[error("cannot stratify into {folds} folds: smallest class has {minority} samples")]
    InsufficientData { folds: usize, minority: usize },
    #[error("grid has no C or gamma values")]
    EmptyGrid,
    #[error("no grid cell produced a converged model")]
    NoConvergedCell,
    #[error("model has no support vectors")]
    EmptyModel,
}

/// Class label; cover is the negative class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Cover,
    Stego,
}

impl Label {
    /// `-1.0` for cover, `+1.0` for stego.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Cover => -1.0,
            Label::Stego => 1.0,
        }
    }

    /// Sign of a decision value; zero maps to stego.
    #[inline]
    pub fn from_decision(value: f64) -> Label {
        if value >= 0.0 {
            Label::Stego
        } else {
            Label::Cover
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub id: String,
    pub label: Label,
    pub features: Vec<f64>,
}

impl LabeledSample {
    pub fn new(id: impl Into<String>, label: Label, features: Vec<f64>) -> Self {
        LabeledSample { id: id.into(), label, features }
    }
}

fn check_dataset(data: &[LabeledSample]) -> Result<usize, SvmError> {
    let dim = data.first().map(|s| s.features.len()).ok_or(SvmError::SingleClass)?;
    if let Some(bad) = data.iter().find(|s| s.features.len() != dim) {
        return Err(SvmError::DimensionMismatch { expected: dim, actual: bad.features.len() });
    }
    let stego = data.iter().filter(|s| s.label == Label::Stego).count();
    if stego == 0 || stego == data.len() {
        return Err(SvmError::SingleClass);
    }
    Ok(dim)
}

fn check_hyper(c: f64, gamma: f64) -> Result<(), SvmError> {
    if c > 0.0 && c.is_finite() && gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(SvmError::InvalidHyperparameters { c, gamma })
    }
}
