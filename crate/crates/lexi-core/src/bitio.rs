//! MSB-first bit packing.
//!
//! The first bit written lands in bit 7 of byte 0, which lets canonical
//! prefix codes be compared against the bitstream in natural reading order.

use crate::error::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    /// Total bits written so far.
    bit_len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `len` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, len: u32) {
        debug_assert!(len <= 64);
        debug_assert!(len == 64 || value < (1u128 << len) as u64);
        for i in (0..len).rev() {
            let bit = (value >> i) & 1;
            let off = (self.bit_len % 8) as u32;
            if off == 0 {
                self.bytes.push(0);
            }
            if bit != 0 {
                *self.bytes.last_mut().unwrap() |= 1 << (7 - off);
            }
            self.bit_len += 1;
        }
    }

    pub fn write_bit(&mut self, bit: bool) {
        self.write_bits(bit as u64, 1);
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    /// Zero-pads to a byte boundary and returns the buffer.
    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    /// Readable bits; may be less than `bytes.len() * 8` when the tail of the
    /// last byte is padding.
    bit_len: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader {
            bytes,
            pos: 0,
            bit_len: bytes.len() as u64 * 8,
        }
    }

    /// A reader over the first `bit_len` bits only.
    pub fn with_bit_len(bytes: &'a [u8], bit_len: u64) -> Result<Self> {
        if bit_len > bytes.len() as u64 * 8 {
            return Err(Error::Truncated {
                what: "bitstream shorter than declared bit length",
            });
        }
        Ok(BitReader {
            bytes,
            pos: 0,
            bit_len,
        })
    }

    pub fn remaining(&self) -> u64 {
        self.bit_len - self.pos
    }

    pub fn consumed(&self) -> u64 {
        self.pos
    }

    fn bit_at(&self, idx: u64) -> u64 {
        let byte = self.bytes[(idx / 8) as usize];
        ((byte >> (7 - (idx % 8))) & 1) as u64
    }

    /// Reads the next `len` bits without consuming them. `len` must not
    /// exceed `remaining()`.
    pub fn peek_bits(&self, len: u32) -> u64 {
        debug_assert!(len as u64 <= self.remaining());
        let mut v = 0u64;
        for i in 0..len as u64 {
            v = (v << 1) | self.bit_at(self.pos + i);
        }
        v
    }

    pub fn read_bits(&mut self, len: u32) -> Result<u64> {
        if len as u64 > self.remaining() {
            return Err(Error::Truncated {
                what: "bitstream ended mid-field",
            });
        }
        let v = self.peek_bits(len);
        self.pos += len as u64;
        Ok(v)
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        Ok(self.read_bits(1)? == 1)
    }

    pub fn skip(&mut self, len: u64) -> Result<()> {
        if len > self.remaining() {
            return Err(Error::Truncated {
                what: "bitstream ended mid-skip",
            });
        }
        self.pos += len;
        Ok(())
    }

    /// True when every remaining bit is zero (trailing padding check).
    pub fn rest_is_zero(&self) -> bool {
        (0..self.remaining()).all(|i| self.bit_at(self.pos + i) == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bits_pack_msb_first() {
        let mut w = BitWriter::new();
        for bit in [true, false, true, true, false, false, false, true, true] {
            w.write_bit(bit);
        }
        assert_eq!(w.bit_len(), 9);
        assert_eq!(w.into_bytes(), vec![0b1011_0001, 0b1000_0000]);
    }

    #[test]
    fn multi_bit_fields_concatenate() {
        let mut w = BitWriter::new();
        w.write_bits(0b101, 3);
        w.write_bits(0b0011, 4);
        w.write_bits(0x1FF, 9);
        assert_eq!(w.bit_len(), 16);
        assert_eq!(w.into_bytes(), vec![0b1010_0111, 0b1111_1111]);
    }

    #[test]
    fn reader_round_trips_writer() {
        let fields: Vec<(u64, u32)> = vec![
            (0, 1),
            (1, 1),
            (0x55, 7),
            (0xABCD, 16),
            (0x1_FFFF_FFFF, 33),
            (7, 3),
        ];
        let mut w = BitWriter::new();
        for &(v, l) in &fields {
            w.write_bits(v, l);
        }
        let total = w.bit_len();
        let bytes = w.into_bytes();
        let mut r = BitReader::with_bit_len(&bytes, total).unwrap();
        for &(v, l) in &fields {
            assert_eq!(r.read_bits(l).unwrap(), v);
        }
        assert_eq!(r.remaining(), 0);
        assert!(r.rest_is_zero());
    }

    #[test]
    fn reading_past_declared_length_is_truncation() {
        let bytes = [0xFF, 0xFF];
        let mut r = BitReader::with_bit_len(&bytes, 3).unwrap();
        assert_eq!(r.read_bits(3).unwrap(), 0b111);
        assert!(matches!(r.read_bits(1), Err(Error::Truncated { .. })));
    }

    #[test]
    fn declared_length_beyond_buffer_is_rejected() {
        assert!(BitReader::with_bit_len(&[0u8], 9).is_err());
    }

    #[test]
    fn rest_is_zero_sees_padding_garbage() {
        let mut r = BitReader::new(&[0b1000_0001]);
        r.read_bits(1).unwrap();
        assert!(!r.rest_is_zero());
        r.read_bits(7).unwrap();
        assert!(r.rest_is_zero());
    }

    #[test]
    fn peek_does_not_consume() {
        let r2 = BitReader::new(&[0b1100_0000]);
        assert_eq!(r2.peek_bits(2), 0b11);
        assert_eq!(r2.peek_bits(2), 0b11);
        assert_eq!(r2.consumed(), 0);
    }
}
