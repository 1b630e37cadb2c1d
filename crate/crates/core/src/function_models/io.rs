//! JSON model files.
//!
//! ```json
//! {
//!   "anchor": [0.0, 0.0],
//!   "base": 0.0,
//!   "hypo_pieces": [{"a": 0.0, "v": [1.0, 0.0], "A": [[0.0, 0.0], [0.0, 0.0]]}],
//!   "hyper_pieces": []
//! }
//! ```
//!
//! `A` is row-major and may be omitted for affine pieces; `hyper_pieces` may
//! be omitted.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::model::{MaxMinQuadModel, QuadPiece};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    pub a: f64,
    pub v: Vec<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub anchor: Vec<f64>,
    #[serde(default)]
    pub base: f64,
    pub hypo_pieces: Vec<PieceDoc>,
    #[serde(default)]
    pub hyper_pieces: Vec<PieceDoc>,
}

fn parse_err(context: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        context: context.into(),
        message: message.into(),
    }
}

impl PieceDoc {
    fn to_piece(&self, n: usize, field: &str) -> Result<QuadPiece> {
        if self.v.len() != n {
            return Err(parse_err(
                format!("{field}.v"),
                format!("expected {n} entries, found {}", self.v.len()),
            ));
        }
        let v = DVector::from_column_slice(&self.v);
        let Some(rows) = &self.matrix else {
            return Ok(QuadPiece::affine(self.a, v));
        };
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(parse_err(
                format!("{field}.A"),
                format!("expected a {n}x{n} matrix"),
            ));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        QuadPiece::new(self.a, v, DMatrix::from_row_slice(n, n, &flat))
    }

    fn from_piece(p: &QuadPiece) -> Self {
        let n = p.dim();
        let zero = p.quadratic.iter().all(|&c| c == 0.0);
        Self {
            a: p.offset,
            v: p.linear.iter().copied().collect(),
            matrix: (!zero).then(|| (0..n).map(|i| p.quadratic.row(i).iter().copied().collect()).collect()),
        }
    }
}

impl ModelDoc {
    pub fn to_model(&self) -> Result<MaxMinQuadModel> {
        let n = self.anchor.len();
        if n == 0 {
            return Err(parse_err("anchor", "must be nonempty"));
        }
        if self.hypo_pieces.is_empty() {
            return Err(parse_err("hypo_pieces", "must be nonempty"));
        }
        let collect = |pieces: &[PieceDoc], name: &str| {
            pieces
                .iter()
                .enumerate()
                .map(|(i, p)| p.to_piece(n, &format!("{name}[{i}]")))
                .collect::<Result<Vec<_>>>()
        };
        MaxMinQuadModel::new(
            DVector::from_column_slice(&self.anchor),
            self.base,
            collect(&self.hypo_pieces, "hypo_pieces")?,
            collect(&self.hyper_pieces, "hyper_pieces")?,
        )
    }

    pub fn from_model(m: &MaxMinQuadModel) -> Self {
        Self {
            anchor: m.anchor().iter().copied().collect(),
            base: m.base(),
            hypo_pieces: m.hypo_pieces().iter().map(PieceDoc::from_piece).collect(),
            hyper_pieces: m.hyper_pieces().iter().map(PieceDoc::from_piece).collect(),
        }
    }
}

pub fn model_from_json(text: &str, context: &str) -> Result<MaxMinQuadModel> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| {
        parse_err(
            context,
            format!("line {} column {}: {e}", e.line(), e.column()),
        )
    })?;
    doc.to_model()
}

pub fn model_to_json(m: &MaxMinQuadModel) -> String {
    serde_json::to_string_pretty(&ModelDoc::from_model(m)).expect("model documents always serialize")
}

pub fn load_model(path: &Path) -> Result<MaxMinQuadModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text, &path.display().to_string())
}
