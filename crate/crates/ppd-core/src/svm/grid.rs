use alloc::vec::Vec;

use super::kernel::{kernel_matrix, SquaredDistances};
use super::smo::{solve_dual, SmoOptions};
use super::{check_dataset, check_hyper, Label, LabeledSample, SvmError};
use crate::rng::derive_seed;

/// Hyperparameter grid and fold count.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub folds: usize,
}

impl GridSpec {
    /// `C ∈ {2^-5, 2^-3, …, 2^15}`, `γ ∈ {2^-15, 2^-13, …, 2^3}`, 5 folds.
    pub fn standard() -> Self {
        GridSpec {
            c_values: (-5..=15).step_by(2).map(|e| libm::exp2(f64::from(e))).collect(),
            gamma_values: (-15..=3).step_by(2).map(|e| libm::exp2(f64::from(e))).collect(),
            folds: 5,
        }
    }

    pub fn cells(&self) -> usize {
        self.c_values.len() * self.gamma_values.len()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub c: f64,
    pub gamma: f64,
    /// Cross-validated accuracy; `None` when some fold failed to converge.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best_c: f64,
    pub best_gamma: f64,
    pub best_accuracy: f64,
    /// Row-major over `c_values` then `gamma_values`.
    pub table: Vec<GridCell>,
}

/// Stratified fold of every sample.
///
/// Within each class, samples are ranked by `derive_seed(seed, "fold", id)` (ties by id)
/// and dealt round-robin, so the assignment depends only on ids, not on input order.
pub fn assign_folds(data: &[LabeledSample], folds: usize, seed: u64) -> Result<Vec<usize>, SvmError> {
    let minority = [Label::Cover, Label::Stego]
        .iter()
        .map(|&l| data.iter().filter(|s| s.label == l).count())
        .min()
        .unwrap_or(0);
    if folds < 2 || folds > minority {
        return Err(SvmError::InsufficientData { folds, minority });
    }
    let mut fold_of = alloc::vec![0usize; data.len()];
    for label in [Label::Cover, Label::Stego] {
        let mut members: Vec<(u64, &str, usize)> = data
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label == label)
            .map(|(i, s)| (derive_seed(seed, "fold", &s.id), s.id.as_str(), i))
            .collect();
        members.sort_unstable();
        for (rank, &(_, _, i)) in members.iter().enumerate() {
            fold_of[i] = rank % folds;
        }
    }
    Ok(fold_of)
}

/// Inputs shared by every grid cell.
pub struct CvData {
    pub dist: SquaredDistances,
    pub labels: Vec<Label>,
    pub fold_of: Vec<usize>,
    pub folds: usize,
}

/// Sorts samples by id and assigns folds, so cross-validation results do not depend on
/// the order `data` arrives in.
pub fn prepare_cv(data: &[LabeledSample], folds: usize, seed: u64) -> Result<CvData, SvmError> {
    check_dataset(data)?;
    let mut order: Vec<&LabeledSample> = data.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let sorted: Vec<LabeledSample> = order.into_iter().cloned().collect();
    let fold_of = assign_folds(&sorted, folds, seed)?;
    let dist = SquaredDistances::new(sorted.iter().map(|s| s.features.as_slice()));
    let labels = sorted.iter().map(|s| s.label).collect();
    Ok(CvData { dist, labels, fold_of, folds })
}

/// Accuracy of one cell; `None` when some fold failed to converge.
pub fn cell_accuracy(cv: &CvData, c: f64, gamma: f64, opts: &SmoOptions) -> Result<Option<f64>, SvmError> {
    match cv_accuracy(&cv.dist, &cv.labels, &cv.fold_of, cv.folds, c, gamma, opts) {
        Ok(a) => Ok(Some(a)),
        Err(SvmError::NonConvergence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Cross-validated accuracy of one `(C, γ)` cell.
pub fn cv_accuracy(
    dist: &SquaredDistances,
    labels: &[Label],
    fold_of: &[usize],
    folds: usize,
    c: f64,
    gamma: f64,
    opts: &SmoOptions,
) -> Result<f64, SvmError> {
    check_hyper(c, gamma)?;
    let mut correct = 0usize;
    for fold in 0..folds {
        let train: Vec<usize> = (0..labels.len()).filter(|&i| fold_of[i] != fold).collect();
        let test: Vec<usize> = (0..labels.len()).filter(|&i| fold_of[i] == fold).collect();
        let y: Vec<f64> = train.iter().map(|&i| labels[i].sign()).collect();
        if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
            return Err(SvmError::SingleClass);
        }
        let k = kernel_matrix(dist, &train, gamma);
        let sol = solve_dual(&k, &y, c, opts)?;
        for &t in &test {
            let f: f64 = train
                .iter()
                .zip(&sol.alpha)
                .zip(&y)
                .filter(|((_, &a), _)| a > 0.0)
                .map(|((&i, &a), &yi)| a * yi * libm::exp(-gamma * dist.get(i, t)))
                .sum::<f64>()
                + sol.bias;
            if Label::from_decision(f) == labels[t] {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / labels.len() as f64)
}

/// Highest accuracy wins; ties go to the smaller `C`, then the smaller `γ`.
pub fn select_best(table: &[GridCell]) -> Result<(f64, f64, f64), SvmError> {
    let mut best: Option<(f64, f64, f64)> = None;
    for cell in table {
        let Some(acc) = cell.accuracy else { continue };
        let better = match best {
            None => true,
            Some((c, g, a)) => acc > a || (acc == a && (cell.c < c || (cell.c == c && cell.gamma < g))),
        };
        if better {
            best = Some((cell.c, cell.gamma, acc));
        }
    }
    best.ok_or(SvmError::NoConvergedCell)
}

/// Evaluates every grid cell sequentially and picks the best.
pub fn grid_search(data: &[LabeledSample], grid: &GridSpec, seed: u64, opts: &SmoOptions) -> Result<GridResult, SvmError> {
    if grid.c_values.is_empty() || grid.gamma_values.is_empty() {
        return Err(SvmError::EmptyGrid);
    }
    let cv = prepare_cv(data, grid.folds, seed)?;
    let mut table = Vec::with_capacity(grid.cells());
    for &c in &grid.c_values {
        for &gamma in &grid.gamma_values {
            let accuracy = cell_accuracy(&cv, c, gamma, opts)?;
            table.push(GridCell { c, gamma, accuracy });
        }
    }
    let (best_c, best_gamma, best_accuracy) = select_best(&table)?;
    Ok(GridResult { best_c, best_gamma, best_accuracy, table })
}
