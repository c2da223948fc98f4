//! The `.lexi` file container: plane-separated lossless storage of a BF16
//! stream with the exponent plane entropy-coded.
//!
//! Layout, all byte-aligned:
//!
//! ```text
//! magic "LEXC" | version 0x01 | value count u64 LE | exponent bits u64 LE
//! codebook wire header (1 + 2n bytes)
//! sign bitplane      ceil(count / 8)      bytes
//! mantissa plane     ceil(7 * count / 8)  bytes
//! exponent bitstream ceil(exponent bits / 8) bytes
//! ```
//!
//! Every region length is derivable from the fixed header plus the codebook
//! header, and decompression demands the file length match that sum exactly,
//! consume exactly the declared exponent bits, and find zero bits in all
//! padding. Offline compression histograms the whole stream, so the codebook
//! is built from exact counts rather than a sampling window.

use crate::bf16::Bf16Triple;
use crate::bitio::{BitReader, BitWriter};
use crate::codebook::{assign_canonical, build_decoder_tables, build_offline_codebook, Codebook, Symbol};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"LEXC";
pub const VERSION: u8 = 1;
/// magic + version + value count + exponent bit length.
const FIXED_HEADER_BYTES: usize = 4 + 1 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ContainerStats {
    pub value_count: u64,
    pub container_bytes: u64,
    pub coded_symbols: usize,
    pub escape_count: u64,
    pub exponent_code_bits: u64,
    /// 8 * values / exponent code bits.
    pub cr_exponent: f64,
    /// 16 * values / (8 * container bytes): whole-file ratio including all
    /// framing.
    pub cr_total: f64,
}

fn empty_stream_codebook() -> Codebook {
    // A zero-value container still carries a well-formed codebook so the
    // format has no special cases; this one codes exponent 0, unused.
    let lengths =
        std::collections::BTreeMap::from([(Symbol::Exponent(0), 1u8), (Symbol::Escape, 1)]);
    assign_canonical(&lengths).expect("static codebook is valid")
}

/// Compresses BF16 words into a container.
pub fn compress_to_vec(values: &[u16]) -> Result<(Vec<u8>, ContainerStats)> {
    let exponents: Vec<u8> = values.iter().map(|&v| Bf16Triple::split(v).exponent).collect();
    let cb = if values.is_empty() {
        empty_stream_codebook()
    } else {
        build_offline_codebook(&exponents)?
    };

    let mut sign_w = BitWriter::new();
    let mut mant_w = BitWriter::new();
    let mut exp_w = BitWriter::new();
    let mut escape_count = 0u64;
    for &v in values {
        let t = Bf16Triple::split(v);
        sign_w.write_bit(t.sign);
        mant_w.write_bits(t.mantissa as u64, 7);
        match cb.code_for(t.exponent) {
            Some(c) => exp_w.write_bits(c.bits as u64, c.len as u32),
            None => {
                let esc = cb.escape().expect("offline codebooks carry an escape");
                escape_count += 1;
                exp_w.write_bits(esc.bits as u64, esc.len as u32);
                exp_w.write_bits(t.exponent as u64, 8);
            }
        }
    }
    let exponent_code_bits = exp_w.bit_len();

    let header = cb.wire_header();
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    out.extend_from_slice(&exponent_code_bits.to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&sign_w.into_bytes());
    out.extend_from_slice(&mant_w.into_bytes());
    out.extend_from_slice(&exp_w.into_bytes());

    let n = values.len() as u64;
    let stats = ContainerStats {
        value_count: n,
        container_bytes: out.len() as u64,
        coded_symbols: cb.coded_count(),
        escape_count,
        exponent_code_bits,
        cr_exponent: if exponent_code_bits == 0 {
            f64::NAN
        } else {
            8.0 * n as f64 / exponent_code_bits as f64
        },
        cr_total: 16.0 * n as f64 / (8.0 * out.len() as f64),
    };
    Ok((out, stats))
}

/// Decompresses a container back to the exact original BF16 words.
pub fn decompress_from_slice(bytes: &[u8]) -> Result<Vec<u16>> {
    if bytes.len() < FIXED_HEADER_BYTES {
        return Err(Error::Truncated {
            what: "container fixed header",
        });
    }
    if bytes[..4] != MAGIC {
        return Err(Error::BadMagic(bytes[..4].try_into().unwrap()));
    }
    if bytes[4] != VERSION {
        return Err(Error::UnsupportedVersion(bytes[4]));
    }
    let value_count = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
    let exponent_bits = u64::from_le_bytes(bytes[13..21].try_into().unwrap());

    let (cb, cb_len) = Codebook::from_wire_header(&bytes[FIXED_HEADER_BYTES..])?;

    // Exact length equation before touching any plane (u128: the declared
    // counts are attacker-controlled and must not overflow the check).
    let sign_bytes = (value_count as u128).div_ceil(8);
    let mant_bytes = (7 * value_count as u128).div_ceil(8);
    let exp_bytes = (exponent_bits as u128).div_ceil(8);
    let want_len =
        FIXED_HEADER_BYTES as u128 + cb_len as u128 + sign_bytes + mant_bytes + exp_bytes;
    if (bytes.len() as u128) < want_len {
        return Err(Error::Truncated {
            what: "container planes",
        });
    }
    if bytes.len() as u128 != want_len {
        return Err(Error::Framing {
            detail: format!(
                "container is {} bytes but its header declares {}",
                bytes.len(),
                want_len
            ),
        });
    }
    let n = value_count as usize;
    let sign_bytes = sign_bytes as usize;
    let mant_bytes = mant_bytes as usize;

    let sign_start = FIXED_HEADER_BYTES + cb_len;
    let mant_start = sign_start + sign_bytes;
    let exp_start = mant_start + mant_bytes;

    let mut sign_r = BitReader::new(&bytes[sign_start..mant_start]);
    let mut mant_r = BitReader::new(&bytes[mant_start..exp_start]);
    let mut exp_r = BitReader::with_bit_len(&bytes[exp_start..], exponent_bits)?;
    let tables = build_decoder_tables(&cb);

    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let sign = sign_r.read_bit()?;
        let mantissa = mant_r.read_bits(7)? as u8;
        let (sym, _) = tables.decode_symbol(&mut exp_r)?;
        let exponent = match sym {
            Symbol::Exponent(e) => e,
            Symbol::Escape => exp_r.read_bits(8)? as u8,
        };
        values.push(Bf16Triple { sign, exponent, mantissa }.join());
    }

    if exp_r.remaining() != 0 {
        return Err(Error::CorruptStream {
            detail: format!(
                "{} exponent bits left over after {} values",
                exp_r.remaining(),
                n
            ),
        });
    }
    // Plane padding must be zero; a reused container region is not tolerated.
    if !sign_r.rest_is_zero() || !mant_r.rest_is_zero() {
        return Err(Error::Framing {
            detail: "nonzero bits in plane padding".into(),
        });
    }
    let exp_pad = &bytes[exp_start..];
    let pad_bits = exp_pad.len() as u64 * 8 - exponent_bits;
    if pad_bits > 0 {
        let last = exp_pad[exp_pad.len() - 1];
        if last & ((1u16 << pad_bits) - 1) as u8 != 0 {
            return Err(Error::Framing {
                detail: "nonzero bits in exponent padding".into(),
            });
        }
    }
    Ok(values)
}
