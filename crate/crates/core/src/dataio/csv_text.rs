use super::{DataError, EmbeddingSet, Matrix, Result};

/// Parses comma-separated rows. A first record whose first token does not parse as a
/// number is treated as a header and skipped.
pub(super) fn decode(bytes: &[u8]) -> Result<EmbeddingSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let mut data = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => DataError::Io(io),
            other => DataError::MalformedHeader(format!("csv: {other:?}")),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if line == 0 && record.get(0).is_some_and(|t| t.parse::<f64>().is_err()) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(DataError::RaggedRows {
                row: rows,
                expected,
                found: record.len(),
            });
        }
        for (col, token) in record.iter().enumerate() {
            let v: f64 = token.parse().map_err(|_| DataError::InvalidNumber {
                row: rows,
                col,
                token: token.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFinite { row: rows, col });
            }
            data.push(v);
        }
        rows += 1;
    }
    EmbeddingSet::new(Matrix::from_vec(rows, width.unwrap_or(0), data))
}

/// `f64` `Display` is the shortest representation that parses back to the same bits.
pub(super) fn encode(set: &EmbeddingSet) -> Vec<u8> {
    let mut out = String::new();
    for row in set.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out.into_bytes()
}
