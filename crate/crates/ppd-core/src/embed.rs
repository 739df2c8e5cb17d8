//! Seeded LSB matching (±1 embedding).
//!
//! Pixels are visited in raster order. For each pixel carrying a bit, a uniform draw
//! `r1` gives the bit (`r1 < 0.5` → 0); when the LSB already equals the bit the pixel is
//! kept, otherwise a second draw `r2` picks `+1` (`r2 < 0.5`) or `-1`. At the range
//! ends the only valid direction is forced (0 → 1, 255 → 254); `r2` is still consumed
//! so the stream layout does not depend on pixel values.
//!
//! With `rate < 1` each pixel first draws a selection number and carries a bit iff it
//! is below `rate`. With `rate == 1` no selection draw is made, so the output equals
//! [`embed_full`] for the same seed.

use crate::image::GrayImage;
use crate::rng::Prng;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EmbedError {
    #[error("embedding rate {0} is outside (0, 1]")]
    InvalidRate(f64),
}

/// What to do when the drawn direction would leave `[0, 255]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Replace the invalid direction by the only valid one.
    #[default]
    ForceValidDirection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedParams {
    pub seed: u64,
    rate: f64,
    pub boundary_policy: BoundaryPolicy,
}

impl EmbedParams {
    pub fn new(seed: u64, rate: f64) -> Result<Self, EmbedError> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(EmbedError::InvalidRate(rate));
        }
        Ok(Self { seed, rate, boundary_policy: BoundaryPolicy::ForceValidDirection })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// One ±1 embedding step on a single pixel value.
#[inline]
pub fn embed_pixel(p: u8, rng: &mut Prng) -> u8 {
    let bit = u8::from(rng.uniform() >= 0.5);
    if p & 1 == bit {
        return p;
    }
    let up = rng.uniform() < 0.5;
    match p {
        0 => 1,
        255 => 254,
        _ if up => p + 1,
        _ => p - 1,
    }
}

/// Embeds one random bit in every pixel (1 bpp).
pub fn embed_full(img: &GrayImage, seed: u64) -> GrayImage {
    let mut rng = Prng::new(seed);
    let pixels = img.pixels().iter().map(|&p| embed_pixel(p, &mut rng)).collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("dimensions unchanged")
}

/// Embeds at the given rate with per-pixel Bernoulli selection.
pub fn embed_rate(img: &GrayImage, params: &EmbedParams) -> GrayImage {
    if params.rate >= 1.0 {
        return embed_full(img, params.seed);
    }
    let mut rng = Prng::new(params.seed);
    let pixels = img
        .pixels()
        .iter()
        .map(|&p| {
            if rng.uniform() < params.rate {
                embed_pixel(p, &mut rng)
            } else {
                p
            }
        })
        .collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("dimensions unchanged")
}
