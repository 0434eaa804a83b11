//! Bit-exact `.grt` tensor files.
//!
//! Layout, little-endian throughout, no padding:
//!
//! ```text
//! magic   4 bytes  ASCII "GRT1"
//! rank    1 byte   unsigned
//! dims    rank x u64
//! payload product(dims) x f32, row-major IEEE-754
//! ```
//!
//! The reader validates the header against the file length before
//! allocating the payload; short files and trailing bytes are both
//! rejected.

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"GRT1";

/// Writes a tensor. The payload must be finite.
pub fn write_tensor<P: AsRef<Path>>(path: P, t: &Tensor<f32>) -> Result<()> {
    if !t.all_finite() {
        return Err(Error::NonFiniteInput("tensor payload"));
    }
    if t.rank() > u8::MAX as usize {
        return Err(Error::OverflowDims);
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&[t.rank() as u8])?;
    for &d in t.shape() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for &x in t.data() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a tensor; exact inverse of [`write_tensor`].
pub fn read_tensor<P: AsRef<Path>>(path: P) -> Result<Tensor<f32>> {
    let file = File::open(path)?;
    let file_len = file.metadata()?.len();
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_exact_or_truncated(&mut r, &mut magic, file_len)?;
    if magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let mut rank_byte = [0u8; 1];
    read_exact_or_truncated(&mut r, &mut rank_byte, file_len)?;
    let rank = rank_byte[0] as usize;
    if rank == 0 {
        return Err(Error::RankZero);
    }

    let mut shape = Vec::with_capacity(rank);
    let mut len: usize = 1;
    for _ in 0..rank {
        let mut dim_bytes = [0u8; 8];
        read_exact_or_truncated(&mut r, &mut dim_bytes, file_len)?;
        let dim = u64::from_le_bytes(dim_bytes);
        let dim: usize = dim.try_into().map_err(|_| Error::OverflowDims)?;
        len = len.checked_mul(dim).ok_or(Error::OverflowDims)?;
        shape.push(dim);
    }
    let payload_bytes = (len as u64).checked_mul(4).ok_or(Error::OverflowDims)?;
    let expected = 5 + 8 * rank as u64 + payload_bytes;
    if file_len != expected {
        return Err(Error::TruncatedFile {
            expected,
            actual: file_len,
        });
    }

    let mut bytes = vec![0u8; payload_bytes as usize];
    r.read_exact(&mut bytes)?;
    let data: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Tensor::from_vec(shape, data)
}

fn read_exact_or_truncated<R: Read>(r: &mut R, buf: &mut [u8], file_len: u64) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::TruncatedFile {
                expected: file_len + 1, // header alone is longer than the file
                actual: file_len,
            }
        } else {
            Error::Io(e)
        }
    })
}
