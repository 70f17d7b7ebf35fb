//! On-disk formats shared by every pipeline stage.
//!
//! * `EMB1`: little-endian binary embedding matrix (f32 or f64 payload).
//! * `WTS1`: little-endian binary stack of linear-layer weight matrices.
//! * CSV: UTF-8, comma separated, optional header row.
//! * JSON reports: see [`ReportDocument`].
//!
//! All values are held as `f64` in memory regardless of the on-disk dtype.

mod csv_text;
mod emb1;
mod matrix;
mod report;
mod wts1;

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

pub use emb1::{EMB1_HEADER_LEN, EMB1_MAGIC};
pub use matrix::Matrix;
pub use report::ReportDocument;
pub use wts1::{WTS1_HEADER_LEN, WTS1_MAGIC};

/// Errors raised while decoding or validating embedding and weight files.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("BadMagic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: Vec<u8> },
    #[error("UnsupportedVersion: {0}")]
    UnsupportedVersion(u16),
    #[error("UnsupportedDtype: code {0}")]
    UnsupportedDtype(u8),
    #[error("MalformedHeader: {0}")]
    MalformedHeader(String),
    #[error("TruncatedPayload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("TrailingBytes: {0} unexpected bytes after payload")]
    TrailingBytes(usize),
    #[error("NonFinite: entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("RaggedRows: row {row} has {found} fields, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("InvalidNumber: row {row}, field {col}: {token:?}")]
    InvalidNumber { row: usize, col: usize, token: String },
    #[error("ShapeMismatch: layer {layer} has {cols} columns but previous layer has {prev_rows} rows")]
    ShapeMismatch {
        layer: usize,
        cols: usize,
        prev_rows: usize,
    },
    #[error("Empty: {0}")]
    Empty(&'static str),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
}

impl DataError {
    /// Stable error name, used verbatim in CLI diagnostics and FFI codes.
    pub fn name(&self) -> &'static str {
        match self {
            DataError::BadMagic { .. } => "BadMagic",
            DataError::UnsupportedVersion(_) => "UnsupportedVersion",
            DataError::UnsupportedDtype(_) => "UnsupportedDtype",
            DataError::MalformedHeader(_) => "MalformedHeader",
            DataError::TruncatedPayload { .. } => "TruncatedPayload",
            DataError::TrailingBytes(_) => "TrailingBytes",
            DataError::NonFinite { .. } => "NonFinite",
            DataError::RaggedRows { .. } => "RaggedRows",
            DataError::InvalidNumber { .. } => "InvalidNumber",
            DataError::ShapeMismatch { .. } => "ShapeMismatch",
            DataError::Empty(_) => "Empty",
            DataError::Io(_) => "Io",
        }
    }
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;

/// Storage precision of an `EMB1` payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            other => Err(DataError::UnsupportedDtype(other)),
        }
    }

    pub fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Emb1(Dtype),
    Csv,
}

impl EmbeddingFormat {
    /// Guess a format from a file extension: `.csv`/`.txt` are CSV, everything else EMB1 (f64).
    pub fn from_path(path: &Path) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("csv") | Some("txt") => EmbeddingFormat::Csv,
            _ => EmbeddingFormat::Emb1(Dtype::F64),
        }
    }
}

/// An `n x D` sample of embedding vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    data: Matrix,
    label: Option<String>,
}

impl EmbeddingSet {
    /// Validates shape (`n >= 1`, `D >= 1`) and finiteness.
    pub fn new(data: Matrix) -> Result<Self> {
        if data.rows() == 0 {
            return Err(DataError::Empty("embedding set has no rows"));
        }
        if data.cols() == 0 {
            return Err(DataError::Empty("embedding set has zero dimensions"));
        }
        if let Some((row, col)) = data.first_non_finite() {
            return Err(DataError::NonFinite { row, col });
        }
        Ok(Self { data, label: None })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let expected = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * expected);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != expected {
                return Err(DataError::RaggedRows {
                    row: i,
                    expected,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(Matrix::from_vec(rows.len(), expected, data))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn n(&self) -> usize {
        self.data.rows()
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.row_iter()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }
}

/// Linear-layer weights in forward order; `W_j` maps width `cols` to width `rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStack {
    layers: Vec<Matrix>,
}

impl WeightStack {
    pub fn new(layers: Vec<Matrix>) -> Result<Self> {
        if layers.is_empty() {
            return Err(DataError::Empty("weight stack has no layers"));
        }
        for (j, w) in layers.iter().enumerate() {
            if w.rows() == 0 || w.cols() == 0 {
                return Err(DataError::Empty("weight matrix has a zero dimension"));
            }
            if let Some((row, col)) = w.first_non_finite() {
                return Err(DataError::NonFinite { row, col });
            }
            if j > 0 && w.cols() != layers[j - 1].rows() {
                return Err(DataError::ShapeMismatch {
                    layer: j,
                    cols: w.cols(),
                    prev_rows: layers[j - 1].rows(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }
}

pub fn read_embeddings<R: Read>(mut source: R, format: EmbeddingFormat) -> Result<EmbeddingSet> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    decode_embeddings(&bytes, format)
}

/// Decodes from an in-memory buffer. For `Emb1` the dtype in the variant is ignored;
/// the header decides.
pub fn decode_embeddings(bytes: &[u8], format: EmbeddingFormat) -> Result<EmbeddingSet> {
    match format {
        EmbeddingFormat::Emb1(_) => emb1::decode(bytes),
        EmbeddingFormat::Csv => csv_text::decode(bytes),
    }
}

pub fn read_embeddings_file(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<EmbeddingSet> {
    let bytes = fs::read(path.as_ref())?;
    decode_embeddings(&bytes, format)
}

pub fn encode_embeddings(set: &EmbeddingSet, format: EmbeddingFormat) -> Vec<u8> {
    match format {
        EmbeddingFormat::Emb1(dtype) => emb1::encode(set, dtype),
        EmbeddingFormat::Csv => csv_text::encode(set),
    }
}

pub fn write_embeddings<W: Write>(set: &EmbeddingSet, format: EmbeddingFormat, mut sink: W) -> Result<()> {
    sink.write_all(&encode_embeddings(set, format))?;
    Ok(())
}

pub fn write_embeddings_file(path: impl AsRef<Path>, set: &EmbeddingSet, format: EmbeddingFormat) -> Result<()> {
    fs::write(path, encode_embeddings(set, format))?;
    Ok(())
}

pub fn read_weight_stack<R: Read>(mut source: R) -> Result<WeightStack> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    wts1::decode(&bytes)
}

pub fn decode_weight_stack(bytes: &[u8]) -> Result<WeightStack> {
    wts1::decode(bytes)
}

pub fn read_weight_stack_file(path: impl AsRef<Path>) -> Result<WeightStack> {
    wts1::decode(&fs::read(path)?)
}

pub fn write_weight_stack(stack: &WeightStack) -> Vec<u8> {
    wts1::encode(stack)
}

pub fn write_weight_stack_file(path: impl AsRef<Path>, stack: &WeightStack) -> Result<()> {
    fs::write(path, wts1::encode(stack))?;
    Ok(())
}
