//! Fixed 128-bit link flits.
//!
//! Byte 0 is an 8-bit value-count header: 1..=12 for data flits, 0 for
//! control flits carrying codebook header bytes. The remaining 15 bytes are
//! payload, zero-padded. Values never straddle flits: a data flit carries the
//! maximal whole-value prefix of the remaining stream that fits its payload
//! and its 12-value header range.

use crate::error::{Error, Result};

pub const FLIT_BYTES: usize = 16;
pub const FLIT_BITS: u32 = 128;
pub const FLIT_HEADER_BITS: u32 = 8;
pub const FLIT_PAYLOAD_BITS: u32 = FLIT_BITS - FLIT_HEADER_BITS;
pub const FLIT_PAYLOAD_BYTES: usize = FLIT_BYTES - 1;
/// Header range cap for data flits.
pub const MAX_VALUES_PER_FLIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flit {
    bytes: [u8; FLIT_BYTES],
}

impl Flit {
    pub fn from_bytes(bytes: [u8; FLIT_BYTES]) -> Self {
        Flit { bytes }
    }

    /// A control flit: header byte 0, payload bytes zero-padded to 15.
    pub fn control(payload: &[u8]) -> Self {
        assert!(payload.len() <= FLIT_PAYLOAD_BYTES);
        let mut bytes = [0u8; FLIT_BYTES];
        bytes[1..1 + payload.len()].copy_from_slice(payload);
        Flit { bytes }
    }

    pub fn as_bytes(&self) -> &[u8; FLIT_BYTES] {
        &self.bytes
    }

    /// The 8-bit value-count header; 0 marks a control flit.
    pub fn header(&self) -> u8 {
        self.bytes[0]
    }

    pub fn is_control(&self) -> bool {
        self.header() == 0
    }

    pub fn payload(&self) -> &[u8] {
        &self.bytes[1..]
    }

    /// Serializes flits as consecutive 16-byte records.
    pub fn dump(flits: &[Flit]) -> Vec<u8> {
        let mut out = Vec::with_capacity(flits.len() * FLIT_BYTES);
        for f in flits {
            out.extend_from_slice(&f.bytes);
        }
        out
    }

    /// Parses a 16-byte-record dump.
    pub fn parse_dump(bytes: &[u8]) -> Result<Vec<Flit>> {
        if bytes.len() % FLIT_BYTES != 0 {
            return Err(Error::Framing {
                detail: format!(
                    "flit dump length {} is not a multiple of {FLIT_BYTES}",
                    bytes.len()
                ),
            });
        }
        Ok(bytes
            .chunks_exact(FLIT_BYTES)
            .map(|c| Flit::from_bytes(c.try_into().unwrap()))
            .collect())
    }
}
