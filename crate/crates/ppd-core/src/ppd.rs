//! Patterns of pixel differences.
//!
//! A block is the five pixels `x12, x13, x22, x23, x33` of a 3×3 neighbourhood
//! (`x22` the centre, `x12` above it, `x13` above-right, `x23` right, `x33` below-right).
//! Taking the block minimum (maximum) as reference `b`, the other four pixels are read in
//! a fixed reference-dependent order `(l, ul, ur, r)` and each digit is the clamped
//! difference `min(|b - n|, S - 1)`. The digit string is a base-`S` number, so each image
//! yields a histogram over `S^4` patterns; features are the normalised ratios of that
//! histogram before and after a 1-bpp calibration embedding.

use alloc::vec;
use alloc::vec::Vec;

use crate::embed::embed_full;
use crate::image::GrayImage;

pub const MIN_LEVELS: u32 = 2;
pub const MAX_LEVELS: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PpdError {
    #[error("difference levels S={0} outside [2, 16]")]
    InvalidLevels(u32),
    #[error("pattern digit {digit} is not below S={levels}")]
    DigitOutOfRange { digit: u8, levels: u32 },
    #[error("pattern index {index} outside [1, {max}]")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("neighbour order table is not a permutation of the other four positions")]
    InvalidOrder,
}

fn check_levels(levels: u32) -> Result<(), PpdError> {
    if (MIN_LEVELS..=MAX_LEVELS).contains(&levels) {
        Ok(())
    } else {
        Err(PpdError::InvalidLevels(levels))
    }
}

/// `S^4`, the number of distinct patterns.
#[inline]
pub fn pattern_count(levels: u32) -> usize {
    (levels as usize).pow(4)
}

/// Difference between neighbouring intensities, clamped to `S - 1`.
#[inline]
pub fn limited_difference(x: u8, y: u8, levels: u32) -> u8 {
    let d = x.abs_diff(y);
    let cap = (levels - 1).min(255) as u8;
    d.min(cap)
}

/// Position of a pixel inside a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    X12 = 0,
    X13 = 1,
    X22 = 2,
    X23 = 3,
    X33 = 4,
}

impl Position {
    pub const ALL: [Position; 5] =
        [Position::X12, Position::X13, Position::X22, Position::X23, Position::X33];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

/// For each reference position, the neighbours in `(l, ul, ur, r)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborOrder([[Position; 4]; 5]);

impl NeighborOrder {
    pub const CANONICAL: NeighborOrder = {
        use Position::*;
        NeighborOrder([
            [X22, X23, X33, X13],
            [X23, X33, X22, X12],
            [X12, X13, X33, X23],
            [X33, X22, X12, X13],
            [X23, X13, X12, X22],
        ])
    };

    /// Builds a table, checking that every row lists the four non-reference positions.
    pub fn new(table: [[Position; 4]; 5]) -> Result<Self, PpdError> {
        for (reference, row) in Position::ALL.iter().zip(&table) {
            let mut seen = [false; 5];
            seen[reference.index()] = true;
            for p in row {
                if seen[p.index()] {
                    return Err(PpdError::InvalidOrder);
                }
                seen[p.index()] = true;
            }
        }
        Ok(NeighborOrder(table))
    }

    #[inline]
    pub fn neighbors(&self, reference: Position) -> [Position; 4] {
        self.0[reference.index()]
    }
}

impl Default for NeighborOrder {
    fn default() -> Self {
        Self::CANONICAL
    }
}

/// Canonical `(l, ul, ur, r)` order for a reference position.
pub fn neighbor_order(reference: Position) -> [Position; 4] {
    NeighborOrder::CANONICAL.neighbors(reference)
}

/// The five block intensities, indexed by [`Position`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelBlock(pub [u8; 5]);

impl PixelBlock {
    pub fn new(x12: u8, x13: u8, x22: u8, x23: u8, x33: u8) -> Self {
        PixelBlock([x12, x13, x22, x23, x33])
    }

    /// Block centred on zero-based `(row, col)`; needs `1 <= row < H-1`, `col < W-1`.
    #[inline]
    pub fn at(img: &GrayImage, row: usize, col: usize) -> Self {
        PixelBlock([
            img.get(row - 1, col),
            img.get(row - 1, col + 1),
            img.get(row, col),
            img.get(row, col + 1),
            img.get(row + 1, col + 1),
        ])
    }

    #[inline]
    pub fn value(&self, p: Position) -> u8 {
        self.0[p.index()]
    }

    pub fn min(&self) -> u8 {
        *self.0.iter().min().unwrap()
    }

    pub fn max(&self) -> u8 {
        *self.0.iter().max().unwrap()
    }
}

/// Four-digit base-`S` pattern, most significant digit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern(pub [u8; 4]);

impl Pattern {
    /// Infinity norm: the largest digit.
    pub fn max_digit(&self) -> u8 {
        *self.0.iter().max().unwrap()
    }
}

#[inline]
fn pattern_from(block: &PixelBlock, reference: Position, order: &NeighborOrder, levels: u32) -> Pattern {
    let b = block.value(reference);
    let n = order.neighbors(reference);
    Pattern([
        limited_difference(b, block.value(n[0]), levels),
        limited_difference(b, block.value(n[1]), levels),
        limited_difference(b, block.value(n[2]), levels),
        limited_difference(b, block.value(n[3]), levels),
    ])
}

/// `(P_min, P_max)` for a block under an arbitrary order table.
///
/// When several positions share the extreme value, `P_min` is the lexicographically
/// largest candidate and `P_max` the smallest.
pub fn extract_patterns_with(block: &PixelBlock, levels: u32, order: &NeighborOrder) -> (Pattern, Pattern) {
    let lo = block.min();
    let hi = block.max();
    let mut p_min: Option<Pattern> = None;
    let mut p_max: Option<Pattern> = None;
    for pos in Position::ALL {
        let v = block.value(pos);
        if v == lo {
            let p = pattern_from(block, pos, order, levels);
            p_min = Some(p_min.map_or(p, |q| q.max(p)));
        }
        if v == hi {
            let p = pattern_from(block, pos, order, levels);
            p_max = Some(p_max.map_or(p, |q| q.min(p)));
        }
    }
    (p_min.unwrap(), p_max.unwrap())
}

/// `(P_min, P_max)` under the canonical order table.
pub fn extract_patterns(block: &PixelBlock, levels: u32) -> (Pattern, Pattern) {
    extract_patterns_with(block, levels, &NeighborOrder::CANONICAL)
}

/// One-based index of a pattern: `P1*S^3 + P2*S^2 + P3*S + P4 + 1`.
pub fn pattern_index(p: &Pattern, levels: u32) -> Result<usize, PpdError> {
    check_levels(levels)?;
    if let Some(&digit) = p.0.iter().find(|&&d| u32::from(d) >= levels) {
        return Err(PpdError::DigitOutOfRange { digit, levels });
    }
    Ok(zero_based_index(p, levels) + 1)
}

#[inline]
fn zero_based_index(p: &Pattern, levels: u32) -> usize {
    let s = levels as usize;
    ((p.0[0] as usize * s + p.0[1] as usize) * s + p.0[2] as usize) * s + p.0[3] as usize
}

/// Inverse of [`pattern_index`].
pub fn pattern_from_index(index: usize, levels: u32) -> Result<Pattern, PpdError> {
    check_levels(levels)?;
    let max = pattern_count(levels);
    if index == 0 || index > max {
        return Err(PpdError::IndexOutOfRange { index, max });
    }
    let s = levels as usize;
    let mut rest = index - 1;
    let mut digits = [0u8; 4];
    for d in digits.iter_mut().rev() {
        *d = (rest % s) as u8;
        rest /= s;
    }
    Ok(Pattern(digits))
}

/// Pattern occurrence counters of one image.
///
/// `counts[k]` holds the count of the pattern with one-based index `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCounts {
    pub levels: u32,
    pub counts: Vec<u64>,
    /// `(height, width)` of the source image.
    pub source_dims: (usize, usize),
}

impl PatternCounts {
    pub fn zeros(levels: u32, source_dims: (usize, usize)) -> Self {
        PatternCounts { levels, counts: vec![0; pattern_count(levels)], source_dims }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Count for a one-based pattern index.
    pub fn get(&self, index: usize) -> u64 {
        self.counts[index - 1]
    }

    #[inline]
    pub fn add(&mut self, p: &Pattern) {
        self.counts[zero_based_index(p, self.levels)] += 1;
    }
}

/// `2·(H-2)·(W-1)`: patterns counted per image.
pub fn expected_total(height: usize, width: usize) -> u64 {
    2 * (height as u64 - 2) * (width as u64 - 1)
}

/// Counts `P_min` and `P_max` of every block, centres at rows `2..=H-1` and columns
/// `1..=W-1` (one-based).
///
/// # Panics
/// If `levels` is outside `[2, 16]`.
pub fn count_patterns(img: &GrayImage, levels: u32) -> PatternCounts {
    count_patterns_with(img, levels, &NeighborOrder::CANONICAL)
}

pub fn count_patterns_with(img: &GrayImage, levels: u32, order: &NeighborOrder) -> PatternCounts {
    check_levels(levels).expect("valid S");
    let (h, w) = (img.height(), img.width());
    let mut out = PatternCounts::zeros(levels, (h, w));
    for row in 1..h - 1 {
        let above = img.row(row - 1);
        let here = img.row(row);
        let below = img.row(row + 1);
        for col in 0..w - 1 {
            let block = PixelBlock([above[col], above[col + 1], here[col], here[col + 1], below[col + 1]]);
            let (p_min, p_max) = extract_patterns_with(&block, levels, order);
            out.add(&p_max);
            out.add(&p_min);
        }
    }
    out
}

/// Difference levels and calibration seed for feature extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PpdParams {
    levels: u32,
    pub calibration_seed: u64,
}

impl PpdParams {
    pub fn new(levels: u32, calibration_seed: u64) -> Result<Self, PpdError> {
        check_levels(levels)?;
        Ok(PpdParams { levels, calibration_seed })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn dimension(&self) -> usize {
        pattern_count(self.levels)
    }
}

/// Min-max normalised count ratios, every component in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub levels: u32,
    /// Smallest raw ratio before normalisation.
    pub ratio_min: f64,
    /// Largest raw ratio before normalisation.
    pub ratio_max: f64,
}

/// Features from the counters before (`before`) and after (`after`) calibration.
///
/// Raw ratios use add-one smoothing, `(T + 1) / (T' + 1)`, so empty patterns are
/// defined. If all ratios are equal every feature is 0.
pub fn features_from_counts(before: &PatternCounts, after: &PatternCounts) -> FeatureVector {
    assert_eq!(before.levels, after.levels, "counts for different S");
    let ratios: Vec<f64> = before
        .counts
        .iter()
        .zip(&after.counts)
        .map(|(&t, &t2)| (t as f64 + 1.0) / (t2 as f64 + 1.0))
        .collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = if hi > lo {
        let span = hi - lo;
        ratios.iter().map(|&f| (f - lo) / span).collect()
    } else {
        vec![0.0; ratios.len()]
    };
    FeatureVector { values, levels: before.levels, ratio_min: lo, ratio_max: hi }
}

/// Full feature pipeline: count, calibrate with a 1-bpp embedding, count again, ratio,
/// normalise.
pub fn extract_features(img: &GrayImage, params: &PpdParams) -> FeatureVector {
    extract_features_with(img, params, &NeighborOrder::CANONICAL)
}

pub fn extract_features_with(img: &GrayImage, params: &PpdParams, order: &NeighborOrder) -> FeatureVector {
    let before = count_patterns_with(img, params.levels, order);
    let calibrated = embed_full(img, params.calibration_seed);
    let after = count_patterns_with(&calibrated, params.levels, order);
    features_from_counts(&before, &after)
}
