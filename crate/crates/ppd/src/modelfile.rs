//! Line-oriented SVM model file.
//!
//! ```text
//! ppd-svm-model 1
//! feature_dim <d>
//! levels <S or ->
//! c <C>
//! gamma <γ>
//! bias <b>
//! prng <name>
//! smoothing <name>
//! master_seed <u64 or ->
//! support_vectors <n>
//! <coef> <x1> ... <xd>        (n lines)
//! ```
//!
//! Reals use 17 significant digits, so a saved model predicts bit-identically after
//! loading.

use std::fmt::Write as _;
use std::path::Path;

use ppd_core::svm::{ModelMetadata, SvmModel};

use crate::cache::format_f64;

pub const MODEL_MAGIC: &str = "ppd-svm-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("model line {line}: {msg}")]
    Format { line: usize, msg: String },
}

pub fn model_to_string(model: &SvmModel) -> String {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    let mut s = String::new();
    let m = &model.metadata;
    writeln!(s, "{MODEL_MAGIC} {MODEL_VERSION}").unwrap();
    writeln!(s, "feature_dim {}", model.feature_dim).unwrap();
    writeln!(s, "levels {}", opt(m.levels.map(|v| v.to_string()))).unwrap();
    writeln!(s, "c {}", format_f64(model.c)).unwrap();
    writeln!(s, "gamma {}", format_f64(model.gamma)).unwrap();
    writeln!(s, "bias {}", format_f64(model.bias)).unwrap();
    writeln!(s, "prng {}", m.prng).unwrap();
    writeln!(s, "smoothing {}", m.smoothing).unwrap();
    writeln!(s, "master_seed {}", opt(m.master_seed.map(|v| v.to_string()))).unwrap();
    writeln!(s, "support_vectors {}", model.support_vectors.len()).unwrap();
    for (sv, coef) in model.support_vectors.iter().zip(&model.dual_coefficients) {
        s.push_str(&format_f64(*coef));
        for v in sv {
            s.push(' ');
            s.push_str(&format_f64(*v));
        }
        s.push('\n');
    }
    s
}

pub fn parse_model(text: &str) -> Result<SvmModel, ModelFileError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut field = |key: &str| -> Result<(usize, String), ModelFileError> {
        let (line, l) = lines.next().ok_or(ModelFileError::Format { line: 0, msg: format!("missing {key}") })?;
        let rest = l
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| ModelFileError::Format { line, msg: format!("expected {key:?}") })?;
        Ok((line, rest.to_string()))
    };
    fn num<T: std::str::FromStr>((line, v): (usize, String)) -> Result<T, ModelFileError> {
        v.parse().map_err(|_| ModelFileError::Format { line, msg: format!("bad value {v:?}") })
    }
    fn opt_num<T: std::str::FromStr>(f: (usize, String)) -> Result<Option<T>, ModelFileError> {
        if f.1 == "-" {
            Ok(None)
        } else {
            num(f).map(Some)
        }
    }

    let (line, version) = field(MODEL_MAGIC)?;
    if version != MODEL_VERSION.to_string() {
        return Err(ModelFileError::Format { line, msg: format!("unsupported version {version}") });
    }
    let feature_dim: usize = num(field("feature_dim")?)?;
    let levels = opt_num(field("levels")?)?;
    let c = num(field("c")?)?;
    let gamma = num(field("gamma")?)?;
    let bias = num(field("bias")?)?;
    let prng = field("prng")?.1;
    let smoothing = field("smoothing")?.1;
    let master_seed = opt_num(field("master_seed")?)?;
    let count: usize = num(field("support_vectors")?)?;

    let mut support_vectors = Vec::with_capacity(count);
    let mut dual_coefficients = Vec::with_capacity(count);
    for (line, l) in text.lines().enumerate().skip(10).map(|(i, l)| (i + 1, l)) {
        let values = l
            .split(' ')
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ModelFileError::Format { line, msg: e.to_string() })?;
        if values.len() != feature_dim + 1 {
            return Err(ModelFileError::Format { line, msg: format!("expected {} values", feature_dim + 1) });
        }
        dual_coefficients.push(values[0]);
        support_vectors.push(values[1..].to_vec());
    }
    if support_vectors.len() != count || count == 0 {
        return Err(ModelFileError::Format {
            line: 10,
            msg: format!("declared {count} support vectors, found {}", support_vectors.len()),
        });
    }
    Ok(SvmModel {
        support_vectors,
        dual_coefficients,
        bias,
        gamma,
        c,
        feature_dim,
        metadata: ModelMetadata { levels, master_seed, prng, smoothing },
    })
}

pub fn save_model(model: &SvmModel, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(model)).map_err(|source| ModelFileError::Io { path: path.display().to_string(), source })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SvmModel, ModelFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelFileError::Io { path: path.display().to_string(), source })?;
    parse_model(&text)
}
