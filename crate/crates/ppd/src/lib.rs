//! IO, experiment harness and command-line front end for PPD steganalysis.
//!
//! The algorithms live in [`ppd_core`]; this crate adds grayscale image files,
//! the feature cache and model formats, corpus handling and the evaluation pipeline.

pub mod cache;
pub mod config;
pub mod corpus;
pub mod experiment;
pub mod imageio;
pub mod modelfile;

pub use ppd_core;
