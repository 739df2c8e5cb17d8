//! Steganalysis of LSB matching based on patterns of pixel differences (PPD).
//!
//! This crate is the allocation-only kernel of the toolkit: the grayscale raster type,
//! seeded ±1 embedding, PPD pattern counting and feature extraction, pattern-class
//! diagnostics, and an RBF-kernel SVM trained with SMO. It performs no IO; file formats,
//! the CLI and the experiment harness live in the `ppd` crate.
//!
//! ```
//! use ppd_core::{GrayImage, ppd::{extract_features, PpdParams}};
//!
//! let pixels: Vec<u8> = (0..64u32).map(|i| (i * 7 % 251) as u8).collect();
//! let img = GrayImage::new(8, 8, pixels).unwrap();
//! let features = extract_features(&img, &PpdParams::new(4, 42).unwrap());
//! assert_eq!(features.values.len(), 256);
//! ```
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod analysis;
pub mod embed;
pub mod image;
pub mod metrics;
pub mod ppd;
pub mod rng;
pub mod svm;

pub use embed::{embed_full, embed_rate, EmbedParams};
pub use image::{GrayImage, ImageError};
pub use ppd::{count_patterns, extract_features, FeatureVector, Pattern, PatternCounts, PpdParams};
