//! `EMB1` layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "EMB1"
//! 4       2     version (u16) = 1
//! 6       1     dtype (u8): 0 = f32, 1 = f64
//! 7       1     reserved (u8) = 0
//! 8       8     n (u64)
//! 16      8     D (u64)
//! 24      ...   n*D values, row-major
//! ```

use super::{DataError, Dtype, EmbeddingSet, Matrix, Result};

pub const EMB1_MAGIC: [u8; 4] = *b"EMB1";
pub const EMB1_HEADER_LEN: usize = 24;
const VERSION: u16 = 1;

pub(super) fn decode(bytes: &[u8]) -> Result<EmbeddingSet> {
    let magic = bytes.get(..4).unwrap_or(bytes);
    if magic != EMB1_MAGIC {
        return Err(DataError::BadMagic {
            expected: EMB1_MAGIC,
            found: magic.to_vec(),
        });
    }
    if bytes.len() < EMB1_HEADER_LEN {
        return Err(DataError::TruncatedPayload {
            expected: EMB1_HEADER_LEN,
            found: bytes.len(),
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(DataError::UnsupportedVersion(version));
    }
    let dtype = Dtype::from_code(bytes[6])?;
    if bytes[7] != 0 {
        return Err(DataError::MalformedHeader(format!(
            "reserved byte is {}, expected 0",
            bytes[7]
        )));
    }
    let n = read_u64(&bytes[8..16]);
    let d = read_u64(&bytes[16..24]);
    if n == 0 || d == 0 {
        return Err(DataError::Empty("EMB1 header declares zero rows or columns"));
    }
    let count = usize::try_from(n)
        .ok()
        .zip(usize::try_from(d).ok())
        .and_then(|(n, d)| n.checked_mul(d))
        .ok_or_else(|| DataError::MalformedHeader(format!("n={n}, D={d} overflows")))?;
    let expected = count
        .checked_mul(dtype.width())
        .and_then(|p| p.checked_add(EMB1_HEADER_LEN))
        .ok_or_else(|| DataError::MalformedHeader(format!("n={n}, D={d} overflows")))?;
    if bytes.len() < expected {
        return Err(DataError::TruncatedPayload {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(DataError::TrailingBytes(bytes.len() - expected));
    }

    let payload = &bytes[EMB1_HEADER_LEN..];
    let data: Vec<f64> = match dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect(),
    };
    EmbeddingSet::new(Matrix::from_vec(n as usize, d as usize, data))
}

pub(super) fn encode(set: &EmbeddingSet, dtype: Dtype) -> Vec<u8> {
    let values = set.matrix().as_slice();
    let mut out = Vec::with_capacity(EMB1_HEADER_LEN + values.len() * dtype.width());
    out.extend_from_slice(&EMB1_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(dtype.code());
    out.push(0);
    out.extend_from_slice(&(set.n() as u64).to_le_bytes());
    out.extend_from_slice(&(set.dim() as u64).to_le_bytes());
    match dtype {
        Dtype::F32 => values
            .iter()
            .for_each(|&v| out.extend_from_slice(&(v as f32).to_le_bytes())),
        Dtype::F64 => values.iter().for_each(|&v| out.extend_from_slice(&v.to_le_bytes())),
    }
    out
}

fn read_u64(b: &[u8]) -> u64 {
    u64::from_le_bytes(b.try_into().expect("8-byte slice"))
}
