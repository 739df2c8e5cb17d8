use alloc::vec::Vec;

use super::SvmError;

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `exp(-γ‖a - b‖²)`.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64, SvmError> {
    if a.len() != b.len() {
        return Err(SvmError::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    Ok(libm::exp(-gamma * squared_distance(a, b)))
}

/// Symmetric matrix of pairwise squared distances, shared by every γ of a grid.
#[derive(Debug, Clone)]
pub struct SquaredDistances {
    n: usize,
    values: Vec<f64>,
}

impl SquaredDistances {
    pub fn new<'a>(points: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let points: Vec<&[f64]> = points.into_iter().collect();
        let n = points.len();
        let mut values = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = squared_distance(points[i], points[j]);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        SquaredDistances { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// Row-major Gram matrix restricted to `subset` (indices into `dist`).
pub fn kernel_matrix(dist: &SquaredDistances, subset: &[usize], gamma: f64) -> Vec<f64> {
    let m = subset.len();
    let mut k = alloc::vec![0.0; m * m];
    for (a, &i) in subset.iter().enumerate() {
        k[a * m + a] = 1.0;
        for (b, &j) in subset.iter().enumerate().skip(a + 1) {
            let v = libm::exp(-gamma * dist.get(i, j));
            k[a * m + b] = v;
            k[b * m + a] = v;
        }
    }
    k
}
