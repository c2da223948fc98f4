//! Baseline exponent-plane codecs for comparison: byte run-length encoding
//! and base-delta-immediate over fixed 32-byte blocks.
//!
//! Both operate on the raw exponent byte stream and report compression
//! ratios against the 16-bit-per-value uncompressed stream the exponents came
//! from, matching how the main codec's exponent-plane ratio is charged.

use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};

/// One RLE record: `run_length` (1..=255) copies of `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RleRecord {
    pub run_length: u8,
    pub value: u8,
}

/// Run-length encodes a byte stream. Adjacent records never share a value
/// unless a run exceeded 255 and had to be split.
pub fn rle_compress(bytes: &[u8]) -> Vec<RleRecord> {
    let mut out = Vec::new();
    let mut iter = bytes.iter().copied();
    let Some(first) = iter.next() else {
        return out;
    };
    let mut run = RleRecord {
        run_length: 1,
        value: first,
    };
    for b in iter {
        if b == run.value && run.run_length < 255 {
            run.run_length += 1;
        } else {
            out.push(run);
            run = RleRecord {
                run_length: 1,
                value: b,
            };
        }
    }
    out.push(run);
    out
}

pub fn rle_decompress(records: &[RleRecord]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for r in records {
        if r.run_length == 0 {
            return Err(Error::CorruptRecord {
                detail: "zero run length".into(),
            });
        }
        out.extend(std::iter::repeat(r.value).take(r.run_length as usize));
    }
    Ok(out)
}

/// Two bytes per record on the wire.
pub fn rle_to_bytes(records: &[RleRecord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(records.len() * 2);
    for r in records {
        out.push(r.run_length);
        out.push(r.value);
    }
    out
}

pub fn rle_from_bytes(bytes: &[u8]) -> Result<Vec<RleRecord>> {
    if bytes.len() % 2 != 0 {
        return Err(Error::CorruptRecord {
            detail: "RLE stream must be an even byte count".into(),
        });
    }
    Ok(bytes
        .chunks_exact(2)
        .map(|c| RleRecord {
            run_length: c[0],
            value: c[1],
        })
        .collect())
}

/// Exponent-plane ratio: 8 bits per input byte vs 16 bits per record.
pub fn rle_cr(input_len: usize, record_count: usize) -> f64 {
    8.0 * input_len as f64 / (16.0 * record_count as f64)
}

pub const BDI_BLOCK: usize = 32;
/// 1 mode bit + 8-bit base + 31 deltas of 3 bits.
pub const BDI_COMPRESSED_BITS: u64 = 1 + 8 + 31 * 3;
/// 1 mode bit + 32 raw bytes.
pub const BDI_RAW_BITS: u64 = 1 + 256;
const DELTA_MIN: i16 = -4;
const DELTA_MAX: i16 = 3;

/// One 32-byte block: compressed when every element's delta from the block's
/// first byte fits 3-bit two's complement, raw otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BdiBlock {
    Compressed { base: u8, deltas: [i8; BDI_BLOCK - 1] },
    Raw([u8; BDI_BLOCK]),
}

impl BdiBlock {
    pub fn bits(&self) -> u64 {
        match self {
            BdiBlock::Compressed { .. } => BDI_COMPRESSED_BITS,
            BdiBlock::Raw(_) => BDI_RAW_BITS,
        }
    }
}

/// A BDI-compressed stream; input shorter than a block multiple is padded by
/// repeating its last byte, and `original_len` records where to cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BdiStream {
    pub original_len: u64,
    pub blocks: Vec<BdiBlock>,
}

impl BdiStream {
    pub fn compressed_bits(&self) -> u64 {
        self.blocks.iter().map(|b| b.bits()).sum()
    }

    /// Exponent-plane ratio: 8 bits per original byte vs block bits.
    pub fn cr(&self) -> f64 {
        8.0 * self.original_len as f64 / self.compressed_bits() as f64
    }
}

pub fn bdi_compress(bytes: &[u8]) -> BdiStream {
    let mut blocks = Vec::new();
    let mut padded: Vec<u8>;
    let data: &[u8] = if bytes.len() % BDI_BLOCK == 0 {
        bytes
    } else {
        padded = bytes.to_vec();
        let pad = *bytes.last().unwrap_or(&0);
        padded.resize(bytes.len().div_ceil(BDI_BLOCK) * BDI_BLOCK, pad);
        &padded
    };
    for chunk in data.chunks_exact(BDI_BLOCK) {
        let base = chunk[0];
        let mut deltas = [0i8; BDI_BLOCK - 1];
        let mut fits = true;
        for (i, &b) in chunk[1..].iter().enumerate() {
            let d = b as i16 - base as i16;
            if !(DELTA_MIN..=DELTA_MAX).contains(&d) {
                fits = false;
                break;
            }
            deltas[i] = d as i8;
        }
        blocks.push(if fits {
            BdiBlock::Compressed { base, deltas }
        } else {
            BdiBlock::Raw(chunk.try_into().unwrap())
        });
    }
    BdiStream {
        original_len: bytes.len() as u64,
        blocks,
    }
}

pub fn bdi_decompress(stream: &BdiStream) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(stream.blocks.len() * BDI_BLOCK);
    for b in &stream.blocks {
        match b {
            BdiBlock::Compressed { base, deltas } => {
                out.push(*base);
                for &d in deltas {
                    let v = *base as i16 + d as i16;
                    if !(0..=255).contains(&v) {
                        return Err(Error::CorruptRecord {
                            detail: format!("delta {d} from base {base} leaves byte range"),
                        });
                    }
                    out.push(v as u8);
                }
            }
            BdiBlock::Raw(bytes) => out.extend_from_slice(bytes),
        }
    }
    if stream.original_len as usize > out.len() {
        return Err(Error::CorruptRecord {
            detail: "original length exceeds decoded blocks".into(),
        });
    }
    out.truncate(stream.original_len as usize);
    Ok(out)
}

/// Wire form: original length u64 LE, then block bits packed MSB-first
/// (mode bit, then base+deltas or 32 raw bytes), zero-padded to a byte.
pub fn bdi_to_bytes(stream: &BdiStream) -> Vec<u8> {
    let mut out = stream.original_len.to_le_bytes().to_vec();
    let mut w = BitWriter::new();
    for b in &stream.blocks {
        match b {
            BdiBlock::Compressed { base, deltas } => {
                w.write_bit(true);
                w.write_bits(*base as u64, 8);
                for &d in deltas {
                    w.write_bits((d as u8 & 0x7) as u64, 3);
                }
            }
            BdiBlock::Raw(bytes) => {
                w.write_bit(false);
                for &byte in bytes.iter() {
                    w.write_bits(byte as u64, 8);
                }
            }
        }
    }
    out.extend_from_slice(&w.into_bytes());
    out
}

pub fn bdi_from_bytes(bytes: &[u8]) -> Result<BdiStream> {
    if bytes.len() < 8 {
        return Err(Error::Truncated {
            what: "BDI length header",
        });
    }
    let original_len = u64::from_le_bytes(bytes[..8].try_into().unwrap());
    let block_count = (original_len as usize).div_ceil(BDI_BLOCK);
    let mut r = BitReader::new(&bytes[8..]);
    let mut blocks = Vec::with_capacity(block_count);
    for _ in 0..block_count {
        if r.read_bit()? {
            let base = r.read_bits(8)? as u8;
            let mut deltas = [0i8; BDI_BLOCK - 1];
            for d in deltas.iter_mut() {
                let raw = r.read_bits(3)? as u8;
                // Sign-extend 3-bit two's complement.
                *d = ((raw << 5) as i8) >> 5;
            }
            blocks.push(BdiBlock::Compressed { base, deltas });
        } else {
            let mut raw = [0u8; BDI_BLOCK];
            for byte in raw.iter_mut() {
                *byte = r.read_bits(8)? as u8;
            }
            blocks.push(BdiBlock::Raw(raw));
        }
    }
    if !r.rest_is_zero() || r.remaining() >= 8 {
        return Err(Error::CorruptRecord {
            detail: "trailing bytes after final BDI block".into(),
        });
    }
    Ok(BdiStream {
        original_len,
        blocks,
    })
}
