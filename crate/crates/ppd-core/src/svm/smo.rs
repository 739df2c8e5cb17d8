//! SMO for the soft-margin dual
//!
//! ```text
//! min ½ αᵀQα − eᵀα   s.t.  0 ≤ αᵢ ≤ C,  yᵀα = 0,   Qᵢⱼ = yᵢyⱼK(xᵢ, xⱼ)
//! ```
//!
//! Each step picks the maximal-violating index `i` and the partner `j` that maximises
//! the second-order decrease of the objective, then solves the two-variable subproblem
//! analytically. Iteration stops once the violation gap `m(α) − M(α)` drops below the
//! tolerance.

use alloc::vec;
use alloc::vec::Vec;

use super::kernel::{kernel_matrix, SquaredDistances};
use super::model::{ModelMetadata, SvmModel};
use super::{check_dataset, check_hyper, LabeledSample, SvmError};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoOptions {
    /// KKT tolerance; also the stopping gap.
    pub tol: f64,
    /// Pair-update budget is `max_passes * max(n, 1000)`.
    pub max_passes: usize,
}

impl Default for SmoOptions {
    fn default() -> Self {
        SmoOptions { tol: 1e-3, max_passes: 10_000 }
    }
}

impl SmoOptions {
    fn max_iterations(&self, n: usize) -> usize {
        self.max_passes.saturating_mul(n.max(1000))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Offset added to `Σ αᵢyᵢK(xᵢ, x)`.
    pub bias: f64,
    pub iterations: usize,
}

/// Solves the dual for a row-major kernel matrix `k` and labels `y ∈ {−1, +1}`.
pub fn solve_dual(k: &[f64], y: &[f64], c: f64, opts: &SmoOptions) -> Result<DualSolution, SvmError> {
    let n = y.len();
    assert_eq!(k.len(), n * n, "kernel matrix size");
    let mut alpha = vec![0.0f64; n];
    let mut grad = vec![-1.0f64; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;
    let max_iter = opts.max_iterations(n);
    let mut iterations = 0;

    loop {
        // i: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
            if in_up && v >= gmax {
                gmax = v;
                i = t;
            }
        }
        if i == usize::MAX {
            break;
        }
        let ki = &k[i * n..(i + 1) * n];

        // j: best second-order partner in I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut best = f64::INFINITY;
        let mut j = usize::MAX;
        for t in 0..n {
            let in_low = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
            if !in_low {
                continue;
            }
            let v = y[t] * grad[t];
            if v >= gmax2 {
                gmax2 = v;
            }
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                let quad = ki[i] + k[t * n + t] - 2.0 * ki[t];
                let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < opts.tol || j == usize::MAX {
            break;
        }
        if iterations >= max_iter {
            return Err(SvmError::NonConvergence { iterations });
        }
        iterations += 1;

        let kj = &k[j * n..(j + 1) * n];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = {
            let q = ki[i] + kj[j] - 2.0 * ki[j];
            if q > 0.0 {
                q
            } else {
                TAU
            }
        };
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    Ok(DualSolution { bias: -offset(&alpha, &grad, y, c), alpha, iterations })
}

/// `ρ` in `f(x) = Σ αᵢyᵢK − ρ`: mean over free vectors, or the midpoint of the
/// feasible interval when none is free.
fn offset(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Dual objective in maximisation form, `Σα − ½ΣΣ αᵢαⱼyᵢyⱼKᵢⱼ`.
pub fn dual_objective(k: &[f64], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            row += alpha[j] * y[j] * k[i * n + j];
        }
        quad += alpha[i] * y[i] * row;
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// Largest violation of the margin conditions by any sample.
    pub max_violation: f64,
    /// `|Σ αᵢyᵢ|`.
    pub equality_residual: f64,
    /// Largest excursion outside `[0, C]`.
    pub bound_violation: f64,
}

impl KktReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation <= tol && self.equality_residual <= 1e-9 && self.bound_violation == 0.0
    }
}

/// Checks the soft-margin KKT conditions on the training set:
/// `α=0 ⇒ yf ≥ 1−tol`, `0<α<C ⇒ |yf−1| ≤ tol`, `α=C ⇒ yf ≤ 1+tol`.
pub fn audit_kkt(k: &[f64], y: &[f64], alpha: &[f64], bias: f64, c: f64) -> KktReport {
    let n = y.len();
    let mut max_violation = 0.0f64;
    let mut bound_violation = 0.0f64;
    for i in 0..n {
        let f: f64 = (0..n).map(|j| alpha[j] * y[j] * k[i * n + j]).sum::<f64>() + bias;
        let margin = y[i] * f;
        let a = alpha[i];
        let v = if a <= 0.0 {
            (1.0 - margin).max(0.0)
        } else if a >= c {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        max_violation = max_violation.max(v);
        bound_violation = bound_violation.max((-a).max(a - c).max(0.0));
    }
    let equality_residual = alpha.iter().zip(y).map(|(a, y)| a * y).sum::<f64>().abs();
    KktReport { max_violation, equality_residual, bound_violation }
}

/// Trains an RBF-SVM and keeps the samples with non-zero multipliers.
///
/// The solution is audited before a model is returned; a solution that fails the KKT
/// audit at `opts.tol` is rejected.
pub fn train_smo(data: &[LabeledSample], c: f64, gamma: f64, opts: &SmoOptions) -> Result<SvmModel, SvmError> {
    let dim = check_dataset(data)?;
    check_hyper(c, gamma)?;
    let dist = SquaredDistances::new(data.iter().map(|s| s.features.as_slice()));
    let all: Vec<usize> = (0..data.len()).collect();
    let k = kernel_matrix(&dist, &all, gamma);
    let y: Vec<f64> = data.iter().map(|s| s.label.sign()).collect();
    let sol = solve_dual(&k, &y, c, opts)?;
    let report = audit_kkt(&k, &y, &sol.alpha, sol.bias, c);
    if !report.passes(opts.tol) {
        return Err(SvmError::KktViolation {
            violation: report.max_violation.max(report.equality_residual).max(report.bound_violation),
        });
    }
    let mut support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    for ((s, &a), &yi) in data.iter().zip(&sol.alpha).zip(&y) {
        if a > 0.0 {
            support_vectors.push(s.features.clone());
            dual_coefficients.push(a * yi);
        }
    }
    Ok(SvmModel {
        support_vectors,
        dual_coefficients,
        bias: sol.bias,
        gamma,
        c,
        feature_dim: dim,
        metadata: ModelMetadata::default(),
    })
}
