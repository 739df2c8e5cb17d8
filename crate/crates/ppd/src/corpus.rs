//! Image corpora on disk and the train/test split.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ppd_core::rng::derive_seed;
use ppd_core::svm::Label;

/// Extensions recognised as images.
pub const IMAGE_EXTENSIONS: [&str; 3] = ["pgm", "png", "pnm"];

/// Image files directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)));
        if path.is_file() && is_image {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// One image of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    /// Unique id, `cover/<name>` or `stego/<name>`.
    pub id: String,
    /// Items sharing a group (a cover and the stego made from it) land in the same half.
    pub group: String,
    pub label: Label,
    pub path: PathBuf,
    /// Embedding seed when the item is synthesised from `path`.
    pub embed_seed: Option<u64>,
}

/// Which half an item is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Train,
    Test,
}

/// Splits by group so that a cover and its stego never straddle the halves.
///
/// Groups are bucketed by composition (pair, cover only, stego only); within each bucket
/// they are ordered by `derive_seed(seed, "split", group)` and the first
/// `round(fraction * n)` go to training.
pub fn split_groups(items: &[CorpusItem], fraction: f64, seed: u64) -> Vec<Half> {
    let mut groups: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    for it in items {
        let e = groups.entry(it.group.as_str()).or_default();
        match it.label {
            Label::Cover => e.0 = true,
            Label::Stego => e.1 = true,
        }
    }
    let mut buckets: BTreeMap<(bool, bool), Vec<(u64, &str)>> = BTreeMap::new();
    for (g, kind) in groups {
        buckets.entry(kind).or_default().push((derive_seed(seed, "split", g), g));
    }
    let mut train: BTreeMap<&str, bool> = BTreeMap::new();
    for members in buckets.values_mut() {
        members.sort_unstable();
        let n_train = (fraction * members.len() as f64).round() as usize;
        for (rank, &(_, g)) in members.iter().enumerate() {
            train.insert(g, rank < n_train);
        }
    }
    items.iter().map(|it| if train[it.group.as_str()] { Half::Train } else { Half::Test }).collect()
}
