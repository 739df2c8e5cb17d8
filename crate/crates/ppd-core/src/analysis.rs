//! Pattern-class diagnostics.
//!
//! A pattern's class `d` is its largest digit (the block's maximum clamped distance), so
//! `S` levels give `S` classes. These helpers bucket histograms by class, enumerate the
//! pattern distribution of uniformly distributed blocks, and measure how ±1 embedding
//! moves blocks between classes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::embed::{embed_full, embed_pixel};
use crate::image::GrayImage;
use crate::ppd::{count_patterns, extract_patterns, pattern_count, PatternCounts, PixelBlock};
use crate::rng::{derive_seed, Prng};

/// Upper bound on blocks enumerated by [`theoretical_histogram`].
pub const MAX_ENUMERATED_BLOCKS: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("enumerating {blocks} blocks exceeds the cap of {MAX_ENUMERATED_BLOCKS}")]
    EnumerationTooLarge { blocks: u64 },
    #[error("value range maximum must be in [0, 255], got {0}")]
    InvalidRange(u32),
    #[error("pattern counts come from images of different size: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("pattern counts use different S: {0} vs {1}")]
    LevelMismatch(u32, u32),
}

/// Clamped maximum pairwise distance inside a block.
pub fn max_distance(block: &PixelBlock, levels: u32) -> u8 {
    let spread = u32::from(block.max() - block.min());
    spread.min(levels - 1) as u8
}

/// Pattern totals per class `d = 0..S-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DClassHistogram {
    pub levels: u32,
    pub class_counts: Vec<u64>,
}

impl DClassHistogram {
    pub fn total(&self) -> u64 {
        self.class_counts.iter().sum()
    }
}

/// Class of every pattern index, `classes[k]` for one-based index `k + 1`.
pub fn class_table(levels: u32) -> Vec<u8> {
    let s = levels as usize;
    (0..pattern_count(levels))
        .map(|k| {
            let digits = [k / (s * s * s), (k / (s * s)) % s, (k / s) % s, k % s];
            *digits.iter().max().unwrap() as u8
        })
        .collect()
}

pub fn d_class_histogram(counts: &PatternCounts) -> DClassHistogram {
    let mut class_counts = vec![0u64; counts.levels as usize];
    for (&c, &d) in counts.counts.iter().zip(&class_table(counts.levels)) {
        class_counts[d as usize] += c;
    }
    DClassHistogram { levels: counts.levels, class_counts }
}

/// Pattern histogram over every block whose five values lie in `[0, value_range_max]`.
///
/// Both `P_min` and `P_max` of each block are counted; entry `k` is one-based index
/// `k + 1`.
pub fn theoretical_histogram(levels: u32, value_range_max: u32) -> Result<Vec<u64>, AnalysisError> {
    if value_range_max > 255 {
        return Err(AnalysisError::InvalidRange(value_range_max));
    }
    let side = u64::from(value_range_max) + 1;
    let blocks = side.pow(5);
    if blocks > MAX_ENUMERATED_BLOCKS {
        return Err(AnalysisError::EnumerationTooLarge { blocks });
    }
    let mut counts = PatternCounts::zeros(levels, (0, 0));
    let top = value_range_max as u8;
    let mut block = [0u8; 5];
    loop {
        let (p_min, p_max) = extract_patterns(&PixelBlock(block), levels);
        counts.add(&p_min);
        counts.add(&p_max);
        // odometer increment, last position fastest
        let mut pos = 5;
        loop {
            if pos == 0 {
                return Ok(counts.counts);
            }
            pos -= 1;
            if block[pos] < top {
                block[pos] += 1;
                break;
            }
            block[pos] = 0;
        }
    }
}

/// Destination classes of one block over repeated independent embeddings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftRow {
    pub source_class: u8,
    /// Pattern count landing in each class `0..S-1`; sums to `2 * trials`.
    pub destinations: Vec<u64>,
    pub trials: u64,
}

/// Embeds random bits into a copy of `block` `trials` times, always starting from the
/// original values, and tallies the classes of both resulting patterns.
pub fn shift_experiment(block: &PixelBlock, levels: u32, trials: u64, seed: u64) -> ShiftRow {
    let mut rng = Prng::new(seed);
    let mut destinations = vec![0u64; levels as usize];
    for _ in 0..trials {
        let mut moved = block.0;
        for p in moved.iter_mut() {
            *p = embed_pixel(*p, &mut rng);
        }
        let (p_min, p_max) = extract_patterns(&PixelBlock(moved), levels);
        destinations[p_min.max_digit() as usize] += 1;
        destinations[p_max.max_digit() as usize] += 1;
    }
    ShiftRow { source_class: max_distance(block, levels), destinations, trials }
}

/// Shift counts aggregated by source class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftMatrix {
    pub levels: u32,
    /// `rows[source][destination]`.
    pub rows: Vec<Vec<u64>>,
    /// Trials accumulated into each source row.
    pub trials: Vec<u64>,
}

impl ShiftMatrix {
    pub fn new(levels: u32) -> Self {
        let s = levels as usize;
        ShiftMatrix { levels, rows: vec![vec![0; s]; s], trials: vec![0; s] }
    }

    pub fn add(&mut self, row: &ShiftRow) {
        let src = row.source_class as usize;
        for (acc, &c) in self.rows[src].iter_mut().zip(&row.destinations) {
            *acc += c;
        }
        self.trials[src] += row.trials;
    }
}

/// Class histograms of `img` and of each of `steps` cumulative 1-bpp embeddings.
///
/// Step `k` (one-based) embeds with `derive_seed(seed, "trajectory", k)`.
pub fn sequential_embedding_trajectory(img: &GrayImage, levels: u32, steps: usize, seed: u64) -> Vec<DClassHistogram> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(d_class_histogram(&count_patterns(img, levels)));
    let mut current = img.clone();
    for step in 1..=steps {
        current = embed_full(&current, derive_seed(seed, "trajectory", &format!("{step}")));
        out.push(d_class_histogram(&count_patterns(&current, levels)));
    }
    out
}

/// Per-class change `embedded - cover`.
pub fn variation_summary(cover: &PatternCounts, embedded: &PatternCounts) -> Result<Vec<i64>, AnalysisError> {
    if cover.levels != embedded.levels {
        return Err(AnalysisError::LevelMismatch(cover.levels, embedded.levels));
    }
    if cover.source_dims != embedded.source_dims {
        return Err(AnalysisError::DimensionMismatch(cover.source_dims, embedded.source_dims));
    }
    let before = d_class_histogram(cover);
    let after = d_class_histogram(embedded);
    Ok(after.class_counts.iter().zip(&before.class_counts).map(|(&a, &b)| a as i64 - b as i64).collect())
}
