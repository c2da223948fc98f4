//! Layer streaming: BF16 values into flits and back.
//!
//! A layer's stream is its codebook wire header carried in control flits,
//! followed by data flits. Each data flit packs N values plane-grouped: N
//! sign bits, then N 7-bit mantissas, then N exponent code units (canonical
//! codeword, or escape codeword plus the raw 8-bit exponent), then zero
//! padding. Whole values only; nothing straddles a flit boundary.

use crate::bf16::Bf16Triple;
use crate::bitio::{BitReader, BitWriter};
use crate::codebook::{build_layer_codebook, Code, Codebook, DecoderTables, LayerBuild, Symbol};
use crate::error::{Error, Result};
use crate::flit::{Flit, FLIT_BITS, FLIT_HEADER_BITS, FLIT_PAYLOAD_BITS, FLIT_PAYLOAD_BYTES, MAX_VALUES_PER_FLIT};
use crate::histogram::EncoderConfig;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EncodeStats {
    pub value_count: u64,
    pub header_flits: u64,
    pub data_flits: u64,
    pub values_per_flit_mean: f64,
    /// Total exponent code bits, counting an escape as its codeword plus the
    /// 8 raw bits.
    pub exponent_code_bits: u64,
    pub escape_count: u64,
    /// 8 * values / exponent_code_bits.
    pub cr_exponent: f64,
    /// 16 * values / (128 * all flits): the link-level whole-value ratio.
    pub cr_total: f64,
}

#[derive(Debug, Clone)]
pub struct EncodedLayer {
    pub header_flits: Vec<Flit>,
    pub data_flits: Vec<Flit>,
    pub stats: EncodeStats,
}

impl EncodedLayer {
    /// Header then data, in link order.
    pub fn all_flits(&self) -> Vec<Flit> {
        let mut v = Vec::with_capacity(self.header_flits.len() + self.data_flits.len());
        v.extend_from_slice(&self.header_flits);
        v.extend_from_slice(&self.data_flits);
        v
    }
}

/// How one value's exponent goes on the wire.
#[derive(Clone, Copy)]
enum ExpUnit {
    Coded(Code),
    Escaped(Code, u8),
}

impl ExpUnit {
    fn bits(self) -> u32 {
        match self {
            ExpUnit::Coded(c) => c.len as u32,
            ExpUnit::Escaped(c, _) => c.len as u32 + 8,
        }
    }
}

fn exp_unit(cb: &Codebook, exponent: u8) -> Result<ExpUnit> {
    if let Some(c) = cb.code_for(exponent) {
        return Ok(ExpUnit::Coded(c));
    }
    match cb.escape() {
        Some(esc) => Ok(ExpUnit::Escaped(esc, exponent)),
        None => Err(Error::InvalidInput {
            detail: format!("exponent {exponent} is uncoded and the codebook has no escape"),
        }),
    }
}

/// Encodes a layer of BF16 words against a prebuilt codebook.
pub fn encode_layer(values: &[u16], cb: &Codebook) -> Result<EncodedLayer> {
    if values.is_empty() {
        return Err(Error::EmptyInput("encode_layer"));
    }

    let header_flits: Vec<Flit> = cb
        .wire_header()
        .chunks(FLIT_PAYLOAD_BYTES)
        .map(Flit::control)
        .collect();

    let mut exponent_code_bits = 0u64;
    let mut escape_count = 0u64;
    let mut data_flits = Vec::new();
    let mut i = 0usize;
    while i < values.len() {
        // Greedy maximal whole-value prefix that fits this flit.
        let mut used_bits = 0u32;
        let mut n = 0usize;
        let mut units: Vec<(Bf16Triple, ExpUnit)> = Vec::with_capacity(MAX_VALUES_PER_FLIT);
        while i + n < values.len() && n < MAX_VALUES_PER_FLIT {
            let t = Bf16Triple::split(values[i + n]);
            let u = exp_unit(cb, t.exponent)?;
            let v_bits = 1 + 7 + u.bits();
            if used_bits + v_bits > FLIT_PAYLOAD_BITS {
                break;
            }
            used_bits += v_bits;
            units.push((t, u));
            n += 1;
        }
        debug_assert!(n >= 1, "a single value always fits a flit");

        let mut w = BitWriter::new();
        w.write_bits(n as u64, FLIT_HEADER_BITS);
        for (t, _) in &units {
            w.write_bit(t.sign);
        }
        for (t, _) in &units {
            w.write_bits(t.mantissa as u64, 7);
        }
        for (_, u) in &units {
            match *u {
                ExpUnit::Coded(c) => w.write_bits(c.bits as u64, c.len as u32),
                ExpUnit::Escaped(c, raw) => {
                    escape_count += 1;
                    w.write_bits(c.bits as u64, c.len as u32);
                    w.write_bits(raw as u64, 8);
                }
            }
            exponent_code_bits += u.bits() as u64;
        }
        debug_assert!(w.bit_len() <= FLIT_BITS as u64);
        let mut bytes = [0u8; 16];
        let packed = w.into_bytes();
        bytes[..packed.len()].copy_from_slice(&packed);
        data_flits.push(Flit::from_bytes(bytes));
        i += n;
    }

    let n = values.len() as u64;
    let total_flits = (header_flits.len() + data_flits.len()) as u64;
    let stats = EncodeStats {
        value_count: n,
        header_flits: header_flits.len() as u64,
        data_flits: data_flits.len() as u64,
        values_per_flit_mean: n as f64 / data_flits.len() as f64,
        exponent_code_bits,
        escape_count,
        cr_exponent: 8.0 * n as f64 / exponent_code_bits as f64,
        cr_total: 16.0 * n as f64 / (FLIT_BITS as u64 * total_flits) as f64,
    };
    Ok(EncodedLayer {
        header_flits,
        data_flits,
        stats,
    })
}

/// Samples the layer, builds its codebook, and encodes it.
pub fn encode_layer_auto(values: &[u16], cfg: &EncoderConfig) -> Result<(EncodedLayer, LayerBuild)> {
    if values.is_empty() {
        return Err(Error::EmptyInput("encode_layer_auto"));
    }
    let exponents: Vec<u8> = values.iter().map(|&v| Bf16Triple::split(v).exponent).collect();
    let build = build_layer_codebook(&exponents, cfg)?;
    let layer = encode_layer(values, &build.codebook)?;
    Ok((layer, build))
}

fn framing<T>(detail: String) -> Result<T> {
    Err(Error::Framing { detail })
}

/// Decodes one data flit, returning its values and per-stage hit counts for
/// the four decode stages (the escape's raw byte is charged to the stage that
/// resolved the escape codeword).
pub fn decode_flit(flit: &Flit, tables: &DecoderTables) -> Result<(Vec<u16>, [u64; 4])> {
    let n = flit.header() as usize;
    if n == 0 {
        return framing("control flit where a data flit was expected".into());
    }
    if n > MAX_VALUES_PER_FLIT {
        return framing(format!("data flit claims {n} values, max is {MAX_VALUES_PER_FLIT}"));
    }

    let mut r = BitReader::new(flit.payload());
    let mut signs = Vec::with_capacity(n);
    let mut mantissas = Vec::with_capacity(n);
    for _ in 0..n {
        signs.push(r.read_bit()?);
    }
    for _ in 0..n {
        mantissas.push(r.read_bits(7)? as u8);
    }
    let mut stage_hits = [0u64; 4];
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let (sym, stage) = tables.decode_symbol(&mut r).map_err(|e| match e {
            // Inside a flit the payload window is fixed, so running out of
            // bits means the header overstated the value count.
            Error::CorruptStream { detail } => Error::Framing {
                detail: format!("value count {n} inconsistent with payload: {detail}"),
            },
            other => other,
        })?;
        stage_hits[stage] += 1;
        let exponent = match sym {
            Symbol::Exponent(e) => e,
            Symbol::Escape => r.read_bits(8).map_err(|_| Error::Framing {
                detail: "escape codeword with no room for its raw exponent".into(),
            })? as u8,
        };
        values.push(
            Bf16Triple {
                sign: signs[k],
                exponent,
                mantissa: mantissas[k],
            }
            .join(),
        );
    }
    if !r.rest_is_zero() {
        return framing("nonzero bits in flit padding".into());
    }
    Ok((values, stage_hits))
}

/// Decodes a full layer stream (control flits with the codebook header, then
/// data flits), returning values and accumulated stage hits.
pub fn decode_layer_full(flits: &[Flit]) -> Result<(Vec<u16>, [u64; 4])> {
    let first = match flits.first() {
        Some(f) => f,
        None => return framing("empty stream: missing codebook header".into()),
    };
    if !first.is_control() {
        return framing("stream does not start with a codebook header flit".into());
    }
    let n_sym = first.payload()[0] as usize;
    // Let the codebook parser produce its own range error for n_sym == 0.
    let header_bytes_needed = 1 + 2 * n_sym.max(1);
    let header_flit_count = header_bytes_needed.div_ceil(FLIT_PAYLOAD_BYTES);
    if flits.len() < header_flit_count {
        return framing(format!(
            "codebook header needs {header_flit_count} control flits, stream has {}",
            flits.len()
        ));
    }
    let mut header_bytes = Vec::with_capacity(header_flit_count * FLIT_PAYLOAD_BYTES);
    for f in &flits[..header_flit_count] {
        if !f.is_control() {
            return framing("data flit interrupts the codebook header".into());
        }
        header_bytes.extend_from_slice(f.payload());
    }
    let (cb, consumed) = Codebook::from_wire_header(&header_bytes)?;
    if header_bytes[consumed..].iter().any(|&b| b != 0) {
        return framing("nonzero bytes after the codebook header".into());
    }
    let tables = crate::codebook::build_decoder_tables(&cb);

    let mut values = Vec::new();
    let mut stage_hits = [0u64; 4];
    for f in &flits[header_flit_count..] {
        let (mut vals, hits) = decode_flit(f, &tables)?;
        values.append(&mut vals);
        for (acc, h) in stage_hits.iter_mut().zip(hits) {
            *acc += h;
        }
    }
    Ok((values, stage_hits))
}

pub fn decode_layer(flits: &[Flit]) -> Result<Vec<u16>> {
    decode_layer_full(flits).map(|(v, _)| v)
}
