//! JSON function files:
//! `{"default": 0|1, "pieces": [{"interval": [lo, hi], "coeffs": [c0, c1, ...], "log_scale": {"sign": s, "log_mag": m}}]}`
//! with `log_scale` optional and coefficients in the local variable `x - lo`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FuncError, Outside, Piece, PiecewiseFn};
use crate::logscalar::LogScalar;

#[derive(Serialize, Deserialize)]
struct FileSpec {
    default: u8,
    pieces: Vec<FilePiece>,
}

#[derive(Serialize, Deserialize)]
struct FilePiece {
    interval: [f64; 2],
    coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    log_scale: Option<LogScalar>,
}

pub fn parse_function(text: &str, origin: &str) -> Result<PiecewiseFn, FuncError> {
    let spec: FileSpec = serde_json::from_str(text)
        .map_err(|e| FuncError::Parse { path: origin.to_string(), message: e.to_string() })?;
    let default = Outside::from_flag(spec.default).ok_or_else(|| FuncError::Parse {
        path: origin.to_string(),
        message: format!("\"default\" must be 0 or 1, got {}", spec.default),
    })?;
    let pieces = spec
        .pieces
        .into_iter()
        .map(|p| Piece { lo: p.interval[0], hi: p.interval[1], coeffs: p.coeffs, log_scale: p.log_scale })
        .collect();
    PiecewiseFn::new(pieces, default).map_err(|e| FuncError::Parse { path: origin.to_string(), message: e.to_string() })
}

pub fn read_function(path: &Path) -> Result<PiecewiseFn, FuncError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| FuncError::Io { path: shown.clone(), source })?;
    parse_function(&text, &shown)
}

pub fn to_json(f: &PiecewiseFn) -> String {
    let spec = FileSpec {
        default: match f.default() {
            Outside::Zero => 0,
            Outside::One => 1,
        },
        pieces: f
            .pieces()
            .iter()
            .map(|p| FilePiece { interval: [p.lo, p.hi], coeffs: p.coeffs.clone(), log_scale: p.log_scale })
            .collect(),
    };
    serde_json::to_string_pretty(&spec).expect("function serialization")
}

pub fn write_function(f: &PiecewiseFn, path: &Path) -> Result<(), FuncError> {
    fs::write(path, to_json(f)).map_err(|source| FuncError::Io { path: path.display().to_string(), source })
}
