//! Reading and writing bf16 value files: raw little-endian u16 words, no
//! header. An odd byte count cannot be a bf16 stream and is rejected.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn bf16_from_bytes(bytes: &[u8]) -> Result<Vec<u16>> {
    if bytes.len() % 2 != 0 {
        return Err(Error::OddByteLength(bytes.len()));
    }
    Ok(bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect())
}

pub fn bf16_to_bytes(values: &[u16]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 2);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_bf16_file(path: impl AsRef<Path>) -> Result<Vec<u16>> {
    bf16_from_bytes(&fs::read(path)?)
}

pub fn write_bf16_file(path: impl AsRef<Path>, values: &[u16]) -> Result<()> {
    fs::write(path, bf16_to_bytes(values))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_are_little_endian() {
        let bytes = [0x80, 0x3F, 0xF7, 0xC2];
        assert_eq!(bf16_from_bytes(&bytes).unwrap(), vec![0x3F80, 0xC2F7]);
        assert_eq!(bf16_to_bytes(&[0x3F80, 0xC2F7]), bytes);
    }

    #[test]
    fn odd_length_is_rejected_with_the_length() {
        match bf16_from_bytes(&[1, 2, 3]) {
            Err(Error::OddByteLength(3)) => {}
            other => panic!("expected OddByteLength(3), got {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("values.bf16");
        let values = vec![0u16, 0xFFFF, 0x3F80, 0x8000];
        write_bf16_file(&path, &values).unwrap();
        assert_eq!(read_bf16_file(&path).unwrap(), values);
    }
}
