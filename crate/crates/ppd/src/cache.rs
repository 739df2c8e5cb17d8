//! Feature cache: one CSV row per image,
//! `image_id,label,S,seed,f1,...,f{S^4}`, values written with 17 significant digits.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ppd_core::ppd::pattern_count;
use ppd_core::svm::{Label, LabeledSample};

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    Format { line: u64, msg: String },
}

/// Ground truth attached to a cached vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleLabel {
    Cover,
    Stego,
    Unknown,
}

impl SampleLabel {
    pub fn as_label(self) -> Option<Label> {
        match self {
            SampleLabel::Cover => Some(Label::Cover),
            SampleLabel::Stego => Some(Label::Stego),
            SampleLabel::Unknown => None,
        }
    }
}

impl From<Label> for SampleLabel {
    fn from(l: Label) -> Self {
        match l {
            Label::Cover => SampleLabel::Cover,
            Label::Stego => SampleLabel::Stego,
        }
    }
}

impl fmt::Display for SampleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleLabel::Cover => "cover",
            SampleLabel::Stego => "stego",
            SampleLabel::Unknown => "unknown",
        })
    }
}

impl FromStr for SampleLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cover" => Ok(SampleLabel::Cover),
            "stego" => Ok(SampleLabel::Stego),
            "unknown" => Ok(SampleLabel::Unknown),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub image_id: String,
    pub label: SampleLabel,
    pub levels: u32,
    /// Calibration seed the vector was computed with.
    pub seed: u64,
    pub features: Vec<f64>,
}

impl FeatureRecord {
    pub fn to_sample(&self) -> Option<LabeledSample> {
        Some(LabeledSample::new(self.image_id.clone(), self.label.as_label()?, self.features.clone()))
    }
}

/// Shortest text with 17 significant digits; parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_cache<W: std::io::Write>(out: W, records: &[FeatureRecord]) -> Result<(), CacheError> {
    let dim = records.first().map_or(0, |r| r.features.len());
    let mut w = csv::WriterBuilder::new().flexible(false).from_writer(out);
    let mut header: Vec<String> = ["image_id", "label", "S", "seed"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=dim).map(|k| format!("f{k}")));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.image_id.clone(), r.label.to_string(), r.levels.to_string(), r.seed.to_string()];
        row.extend(r.features.iter().map(|&v| format_f64(v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| CacheError::Io { path: "<cache>".into(), source })?;
    Ok(())
}

pub fn save_cache(path: impl AsRef<Path>, records: &[FeatureRecord]) -> Result<(), CacheError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| CacheError::Io { path: path.display().to_string(), source })?;
    write_cache(std::io::BufWriter::new(file), records)
}

pub fn read_cache<R: std::io::Read>(input: R) -> Result<Vec<FeatureRecord>, CacheError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?.clone();
    let fixed = ["image_id", "label", "S", "seed"];
    if header.len() < 4 || header.iter().take(4).ne(fixed) {
        return Err(CacheError::Format { line: 1, msg: "header must start with image_id,label,S,seed".into() });
    }
    let dim = header.len() - 4;
    for (k, name) in header.iter().skip(4).enumerate() {
        if name != format!("f{}", k + 1) {
            return Err(CacheError::Format { line: 1, msg: format!("unexpected column {name:?}") });
        }
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |msg: String| CacheError::Format { line, msg };
        let levels: u32 = row[2].parse().map_err(|e| bad(format!("S: {e}")))?;
        if !(2..=16).contains(&levels) || pattern_count(levels) != dim {
            return Err(bad(format!("S={levels} does not match {dim} feature columns")));
        }
        let features = row
            .iter()
            .skip(4)
            .map(|v| v.parse::<f64>().map_err(|e| bad(format!("feature {v:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(FeatureRecord {
            image_id: row[0].to_string(),
            label: row[1].parse().map_err(bad)?,
            levels,
            seed: row[3].parse().map_err(|e| bad(format!("seed: {e}")))?,
            features,
        });
    }
    Ok(out)
}

pub fn load_cache(path: impl AsRef<Path>) -> Result<Vec<FeatureRecord>, CacheError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CacheError::Io { path: path.display().to_string(), source })?;
    read_cache(std::io::BufReader::new(file))
}
