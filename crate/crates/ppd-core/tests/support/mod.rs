//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the pattern, embedding or SVM code under test; only the
//! PRNG is shared, since it defines the random streams being replayed.
#![allow(dead_code)]

use ppd_core::rng::Prng;
use ppd_core::GrayImage;

pub fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut rng = Prng::new(seed);
    GrayImage::new(w, h, (0..w * h).map(|_| (rng.next_u64() >> 56) as u8).collect()).unwrap()
}

/// Standard normal draw (Box-Muller).
pub fn gaussian(rng: &mut Prng) -> f64 {
    let u1 = 1.0 - rng.uniform();
    let u2 = rng.uniform();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

// Block pixels as (row, col) offsets from the centre: x12, x13, x22, x23, x33.
const OFFSETS: [(isize, isize); 5] = [(-1, 0), (-1, 1), (0, 0), (0, 1), (1, 1)];

// Neighbour offsets read for each reference pixel.
const READ_ORDER: [[(isize, isize); 4]; 5] = [
    [(0, 0), (0, 1), (1, 1), (-1, 1)],
    [(0, 1), (1, 1), (0, 0), (-1, 0)],
    [(-1, 0), (-1, 1), (1, 1), (0, 1)],
    [(1, 1), (0, 0), (-1, 0), (-1, 1)],
    [(0, 1), (-1, 1), (-1, 0), (0, 0)],
];

fn px(img: &GrayImage, r: usize, c: usize, (dr, dc): (isize, isize)) -> i32 {
    i32::from(img.get((r as isize + dr) as usize, (c as isize + dc) as usize))
}

/// `(P_min, P_max)` of five block values in x12, x13, x22, x23, x33 order, with explicit
/// candidate sorting for ties.
pub fn naive_block(values: [i32; 5], s: u32) -> ([u8; 4], [u8; 4]) {
    let pattern = |reference: usize| -> [u8; 4] {
        let mut out = [0u8; 4];
        for (k, off) in READ_ORDER[reference].iter().enumerate() {
            let n = OFFSETS.iter().position(|o| o == off).unwrap();
            out[k] = (values[reference] - values[n]).unsigned_abs().min(s - 1) as u8;
        }
        out
    };
    let lo = *values.iter().min().unwrap();
    let hi = *values.iter().max().unwrap();
    let mut mins: Vec<[u8; 4]> = (0..5).filter(|&k| values[k] == lo).map(pattern).collect();
    let mut maxs: Vec<[u8; 4]> = (0..5).filter(|&k| values[k] == hi).map(pattern).collect();
    mins.sort();
    maxs.sort();
    (*mins.last().unwrap(), maxs[0])
}

/// Zero-based pattern index.
pub fn index_of(p: [u8; 4], s: u32) -> usize {
    p.iter().fold(0usize, |acc, &d| acc * s as usize + d as usize)
}

/// Pattern histogram recomputed block by block.
pub fn naive_counts(img: &GrayImage, s: u32) -> Vec<u64> {
    let mut counts = vec![0u64; (s as usize).pow(4)];
    for r in 1..img.height() - 1 {
        for c in 0..img.width() - 1 {
            let mut values = [0i32; 5];
            for (v, &o) in values.iter_mut().zip(&OFFSETS) {
                *v = px(img, r, c, o);
            }
            let (lo, hi) = naive_block(values, s);
            counts[index_of(lo, s)] += 1;
            counts[index_of(hi, s)] += 1;
        }
    }
    counts
}

/// ±1 embedding of one bit per pixel, written out step by step.
pub fn naive_embed(img: &GrayImage, seed: u64) -> GrayImage {
    let mut rng = Prng::new(seed);
    let mut out = Vec::with_capacity(img.pixels().len());
    for &p in img.pixels() {
        let bit = if rng.uniform() >= 0.5 { 1 } else { 0 };
        if p % 2 == bit {
            out.push(p);
            continue;
        }
        let r2 = rng.uniform();
        out.push(if p == 0 {
            1
        } else if p == 255 {
            254
        } else if r2 < 0.5 {
            p + 1
        } else {
            p - 1
        });
    }
    GrayImage::new(img.width(), img.height(), out).unwrap()
}

pub fn naive_features(img: &GrayImage, s: u32, seed: u64) -> Vec<f64> {
    let t = naive_counts(img, s);
    let t2 = naive_counts(&naive_embed(img, seed), s);
    let f: Vec<f64> = t.iter().zip(&t2).map(|(&a, &b)| (a as f64 + 1.0) / (b as f64 + 1.0)).collect();
    let mut lo = f[0];
    let mut hi = f[0];
    for &v in &f {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    if hi == lo {
        return vec![0.0; f.len()];
    }
    f.iter().map(|&v| (v - lo) / (hi - lo)).collect()
}

/// Exact distribution of the class of a block after one ±1 embedding pass, from all 3^5
/// per-pixel outcomes.
pub fn exact_shift_distribution(block: [u8; 5], s: u32) -> Vec<f64> {
    // (value, probability) outcomes of one pixel
    let outcomes = |p: u8| -> Vec<(u8, f64)> {
        match p {
            0 => vec![(0, 0.5), (1, 0.5)],
            255 => vec![(255, 0.5), (254, 0.5)],
            _ => vec![(p, 0.5), (p + 1, 0.25), (p - 1, 0.25)],
        }
    };
    let per_pixel: Vec<Vec<(u8, f64)>> = block.iter().map(|&p| outcomes(p)).collect();
    let mut dist = vec![0.0; s as usize];
    let mut idx = [0usize; 5];
    loop {
        let mut prob = 1.0;
        let mut vals = [0u8; 5];
        for k in 0..5 {
            let (v, p) = per_pixel[k][idx[k]];
            vals[k] = v;
            prob *= p;
        }
        let spread = vals.iter().max().unwrap() - vals.iter().min().unwrap();
        dist[(u32::from(spread)).min(s - 1) as usize] += prob;
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < per_pixel[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == 5 {
                return dist;
            }
        }
    }
}

/// Pearson statistic against expected probabilities, pooling cells with expectation
/// below 5 into one; returns `(statistic, degrees of freedom)`.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> (f64, usize) {
    let n: u64 = observed.iter().sum();
    let mut cells = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * n as f64;
        if e < 5.0 {
            pool_o += o as f64;
            pool_e += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pool_e > 0.0 {
        cells.push((pool_o, pool_e));
    }
    let stat = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    (stat, cells.len().saturating_sub(1))
}

/// Upper `alpha` quantile; with no degrees of freedom only a perfect fit passes.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    if df == 0 {
        return f64::MIN_POSITIVE;
    }
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}

pub fn rbf_matrix(x: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let n = x.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            k[i * n + j] = (-gamma * d).exp();
        }
    }
    k
}

/// `Σα - ½ Σ αᵢαⱼyᵢyⱼKᵢⱼ`.
pub fn dual_value(k: &[f64], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i * n + j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

// Euclidean projection onto {0 ≤ α ≤ C, Σ yα = 0}: α = clip(v - λy), λ by bisection.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> { v.iter().zip(y).map(|(&vi, &yi)| (vi - lambda * yi).clamp(0.0, c)).collect() };
    let balance = |a: &[f64]| -> f64 { a.iter().zip(y).map(|(ai, yi)| ai * yi).sum() };
    let span = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if balance(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Dual optimum by accelerated projected gradient with restarts.
pub fn qp_oracle(k: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let lipschitz = (0..n).map(|i| (0..n).map(|j| q(i, j).abs()).sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lipschitz;
    let grad = |a: &[f64]| -> Vec<f64> { (0..n).map(|i| 1.0 - (0..n).map(|j| q(i, j) * a[j]).sum::<f64>()).collect() };
    let mut alpha = vec![0.0; n];
    let mut z = alpha.clone();
    let mut t = 1.0f64;
    let mut best = dual_value(k, y, &alpha);
    for _ in 0..100_000 {
        let g = grad(&z);
        let next = project(&z.iter().zip(&g).map(|(zi, gi)| zi + step * gi).collect::<Vec<_>>(), y, c);
        let value = dual_value(k, y, &next);
        if value < best {
            // restart momentum
            t = 1.0;
            z = alpha.clone();
            continue;
        }
        let moved: f64 = next.iter().zip(&alpha).map(|(a, b)| (a - b).abs()).sum();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next.iter().zip(&alpha).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
        alpha = next;
        t = t_next;
        best = value;
        if moved < 1e-12 {
            break;
        }
    }
    alpha
}

/// Random two-class Gaussian dataset: `(points, labels ±1)`.
pub fn blobs(n: usize, dim: usize, separation: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = Prng::new(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        x.push((0..dim).map(|_| gaussian(&mut rng) + label * separation / 2.0).collect());
        y.push(label);
    }
    (x, y)
}
