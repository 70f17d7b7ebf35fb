//! `WTS1` layout (all integers little-endian):
//!
//! ```text
//! "WTS1" | version u16 = 1 | reserved u16 = 0 | layer count u32
//! then per layer: rows u64 | cols u64 | rows*cols f64, row-major
//! ```

use super::{DataError, Matrix, Result, WeightStack};

pub const WTS1_MAGIC: [u8; 4] = *b"WTS1";
pub const WTS1_HEADER_LEN: usize = 12;
const VERSION: u16 = 1;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .ok_or_else(|| DataError::MalformedHeader("declared size overflows".into()))?;
        if end > self.bytes.len() {
            return Err(DataError::TruncatedPayload {
                expected: end,
                found: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub(super) fn decode(bytes: &[u8]) -> Result<WeightStack> {
    let magic = bytes.get(..4).unwrap_or(bytes);
    if magic != WTS1_MAGIC {
        return Err(DataError::BadMagic {
            expected: WTS1_MAGIC,
            found: magic.to_vec(),
        });
    }
    let mut cur = Cursor { bytes, pos: 4 };
    let version = u16::from_le_bytes(cur.take(2)?.try_into().expect("2 bytes"));
    if version != VERSION {
        return Err(DataError::UnsupportedVersion(version));
    }
    let reserved = u16::from_le_bytes(cur.take(2)?.try_into().expect("2 bytes"));
    if reserved != 0 {
        return Err(DataError::MalformedHeader(format!(
            "reserved field is {reserved}, expected 0"
        )));
    }
    let count = u32::from_le_bytes(cur.take(4)?.try_into().expect("4 bytes")) as usize;
    if count == 0 {
        return Err(DataError::Empty("WTS1 declares zero layers"));
    }

    let mut layers: Vec<Matrix> = Vec::with_capacity(count.min(1024));
    for j in 0..count {
        let rows = cur.u64()?;
        let cols = cur.u64()?;
        if rows == 0 || cols == 0 {
            return Err(DataError::Empty("weight matrix has a zero dimension"));
        }
        let (rows, cols) = (
            usize::try_from(rows).map_err(|_| DataError::MalformedHeader("rows overflow".into()))?,
            usize::try_from(cols).map_err(|_| DataError::MalformedHeader("cols overflow".into()))?,
        );
        if let Some(prev) = layers.last() {
            if cols != prev.rows() {
                return Err(DataError::ShapeMismatch {
                    layer: j,
                    cols,
                    prev_rows: prev.rows(),
                });
            }
        }
        let len = rows
            .checked_mul(cols)
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| DataError::MalformedHeader(format!("{rows}x{cols} overflows")))?;
        let payload = cur.take(len)?;
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        layers.push(Matrix::from_vec(rows, cols, data));
    }
    if cur.pos != bytes.len() {
        return Err(DataError::TrailingBytes(bytes.len() - cur.pos));
    }
    WeightStack::new(layers)
}

pub(super) fn encode(stack: &WeightStack) -> Vec<u8> {
    let total: usize = stack.layers().iter().map(|w| 16 + 8 * w.as_slice().len()).sum();
    let mut out = Vec::with_capacity(WTS1_HEADER_LEN + total);
    out.extend_from_slice(&WTS1_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(stack.len() as u32).to_le_bytes());
    for w in stack.layers() {
        out.extend_from_slice(&(w.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(w.cols() as u64).to_le_bytes());
        for v in w.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}
