//! Confusion counts and ROC curves. Stego is the positive class.

use alloc::vec::Vec;

use crate::svm::Label;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("ROC needs both classes in the test set")]
    SingleClass,
    #[error("decision values must not be NaN")]
    NanScore,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn record(&mut self, predicted: Label, actual: Label) {
        match (predicted, actual) {
            (Label::Stego, Label::Stego) => self.tp += 1,
            (Label::Stego, Label::Cover) => self.fp += 1,
            (Label::Cover, Label::Cover) => self.tn += 1,
            (Label::Cover, Label::Stego) => self.fn_ += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut c = Confusion::default();
        for (p, a) in pairs {
            c.record(p, a);
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Samples with decision value `>= threshold` are called stego.
    pub threshold: f64,
}

/// ROC vertices from `(decision value, true label)` pairs.
///
/// The first vertex is `(0, 0)` at threshold `+∞`; then one vertex per distinct
/// decision value in decreasing order, ending at `(1, 1)`.
pub fn roc_curve(scored: &[(f64, Label)]) -> Result<Vec<RocPoint>, MetricsError> {
    if scored.iter().any(|(s, _)| s.is_nan()) {
        return Err(MetricsError::NanScore);
    }
    let positives = scored.iter().filter(|(_, l)| *l == Label::Stego).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricsError::SingleClass);
    }
    let mut sorted: Vec<(f64, Label)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = Vec::with_capacity(sorted.len() + 1);
    points.push(RocPoint { fpr: 0.0, tpr: 0.0, threshold: f64::INFINITY });
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            match sorted[i].1 {
                Label::Stego => tp += 1,
                Label::Cover => fp += 1,
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
            threshold,
        });
    }
    Ok(points)
}

/// Trapezoidal area under an ROC curve.
pub fn auc(points: &[RocPoint]) -> f64 {
    points.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0).sum()
}
