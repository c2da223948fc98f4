//! C ABI over the core codec: compress/decompress whole BF16 streams,
//! profile field entropies, and build exponent codebooks behind an opaque
//! handle. Every entry point is panic-safe (panics become
//! `LEXI_STATUS_INTERNAL`) and touches only memory the caller handed it.
//!
//! Ownership rules: buffers returned through [`LexiBuffer`] are owned by the
//! caller and must be released with [`lexi_buffer_free`]; codebook handles
//! with [`lexi_codebook_free`]. Nothing here keeps internal references to
//! caller memory after a call returns.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use lexi_core::codebook::{build_offline_codebook, Codebook};
use lexi_core::container::{compress_to_vec, decompress_from_slice};
use lexi_core::io::bf16_to_bytes;
use lexi_core::{profile_stream, Error};

/// Result of every fallible call in this ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiStatus {
    LexiOk = 0,
    /// A required pointer argument was null.
    LexiNullArgument = 1,
    /// Arguments were readable but semantically unusable (e.g. empty input
    /// where values are required).
    LexiInvalidInput = 2,
    /// Input bytes do not form a valid compressed stream.
    LexiCorruptData = 3,
    /// Unexpected internal failure; the library state is still sound.
    LexiInternal = 4,
}

/// A heap buffer owned by the caller after a successful call.
#[repr(C)]
#[derive(Debug)]
pub struct LexiBuffer {
    pub data: *mut u8,
    pub len: usize,
    pub cap: usize,
}

/// Field entropy summary of a BF16 stream, bits per field.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LexiProfile {
    pub sign_entropy_bits: f64,
    pub exponent_entropy_bits: f64,
    pub mantissa_entropy_bits: f64,
    pub distinct_exponents: u64,
    pub total_values: u64,
}

/// Opaque exponent codebook handle.
pub struct LexiCodebook {
    inner: Codebook,
}

fn status_of(err: &Error) -> LexiStatus {
    match err {
        Error::EmptyInput(_)
        | Error::OddByteLength(_)
        | Error::NoSymbols
        | Error::InvalidInput { .. } => LexiStatus::LexiInvalidInput,
        Error::Io(_) => LexiStatus::LexiInternal,
        _ => LexiStatus::LexiCorruptData,
    }
}

fn buffer_from_vec(mut v: Vec<u8>) -> LexiBuffer {
    let buf = LexiBuffer {
        data: v.as_mut_ptr(),
        len: v.len(),
        cap: v.capacity(),
    };
    std::mem::forget(v);
    buf
}

fn guarded(f: impl FnOnce() -> LexiStatus) -> LexiStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(LexiStatus::LexiInternal)
}

/// Builds a slice from FFI arguments; a null pointer is only legal when the
/// count is zero.
unsafe fn slice_arg<'a, T>(ptr: *const T, count: usize) -> Option<&'a [T]> {
    if count == 0 {
        return Some(&[]);
    }
    if ptr.is_null() {
        return None;
    }
    Some(std::slice::from_raw_parts(ptr, count))
}

/// Compresses `value_count` BF16 words into a self-describing container.
///
/// On success `*out` holds the container bytes; free with
/// [`lexi_buffer_free`]. An empty input is allowed and produces a minimal
/// valid container.
///
/// # Safety
/// `values` must point to `value_count` readable `uint16_t`s (or be anything
/// when `value_count` is 0), and `out` must point to writable
/// [`LexiBuffer`] storage.
#[no_mangle]
pub unsafe extern "C" fn lexi_compress_bf16(
    values: *const u16,
    value_count: usize,
    out: *mut LexiBuffer,
) -> LexiStatus {
    if out.is_null() {
        return LexiStatus::LexiNullArgument;
    }
    let Some(values) = slice_arg(values, value_count) else {
        return LexiStatus::LexiNullArgument;
    };
    guarded(|| match compress_to_vec(values) {
        Ok((bytes, _)) => {
            out.write(buffer_from_vec(bytes));
            LexiStatus::LexiOk
        }
        Err(e) => status_of(&e),
    })
}

/// Decompresses a container back into little-endian BF16 bytes
/// (2 bytes per value).
///
/// # Safety
/// `data` must point to `len` readable bytes (or be anything when `len` is
/// 0), and `out` must point to writable [`LexiBuffer`] storage.
#[no_mangle]
pub unsafe extern "C" fn lexi_decompress(
    data: *const u8,
    len: usize,
    out: *mut LexiBuffer,
) -> LexiStatus {
    if out.is_null() {
        return LexiStatus::LexiNullArgument;
    }
    let Some(bytes) = slice_arg(data, len) else {
        return LexiStatus::LexiNullArgument;
    };
    guarded(|| match decompress_from_slice(bytes) {
        Ok(values) => {
            out.write(buffer_from_vec(bf16_to_bytes(&values)));
            LexiStatus::LexiOk
        }
        Err(e) => status_of(&e),
    })
}

/// Computes per-field entropies of a BF16 stream.
///
/// # Safety
/// `values` must point to `value_count` readable `uint16_t`s and `out` to
/// writable [`LexiProfile`] storage.
#[no_mangle]
pub unsafe extern "C" fn lexi_profile(
    values: *const u16,
    value_count: usize,
    out: *mut LexiProfile,
) -> LexiStatus {
    if out.is_null() {
        return LexiStatus::LexiNullArgument;
    }
    let Some(values) = slice_arg(values, value_count) else {
        return LexiStatus::LexiNullArgument;
    };
    guarded(|| match profile_stream(values) {
        Ok(p) => {
            out.write(LexiProfile {
                sign_entropy_bits: p.sign_entropy_bits,
                exponent_entropy_bits: p.exponent_entropy_bits,
                mantissa_entropy_bits: p.mantissa_entropy_bits,
                distinct_exponents: p.distinct_exponents as u64,
                total_values: p.total_values,
            });
            LexiStatus::LexiOk
        }
        Err(e) => status_of(&e),
    })
}

/// Builds a canonical codebook from a full exponent stream and returns an
/// owned handle through `out`.
///
/// # Safety
/// `exponents` must point to `count` readable bytes and `out` to a writable
/// pointer slot. The returned handle must be released with
/// [`lexi_codebook_free`].
#[no_mangle]
pub unsafe extern "C" fn lexi_codebook_build(
    exponents: *const u8,
    count: usize,
    out: *mut *mut LexiCodebook,
) -> LexiStatus {
    if out.is_null() {
        return LexiStatus::LexiNullArgument;
    }
    let Some(exponents) = slice_arg(exponents, count) else {
        return LexiStatus::LexiNullArgument;
    };
    guarded(|| match build_offline_codebook(exponents) {
        Ok(cb) => {
            out.write(Box::into_raw(Box::new(LexiCodebook { inner: cb })));
            LexiStatus::LexiOk
        }
        Err(e) => status_of(&e),
    })
}

/// Number of exponent values with dedicated codewords (at most 32).
/// Returns 0 when the handle is null.
///
/// # Safety
/// `cb` must be null or a live handle from [`lexi_codebook_build`].
#[no_mangle]
pub unsafe extern "C" fn lexi_codebook_coded_count(cb: *const LexiCodebook) -> u32 {
    match cb.as_ref() {
        Some(cb) => cb.inner.coded_count() as u32,
        None => 0,
    }
}

/// Codeword length in bits for an exponent: 1..=32 when coded, 0 when the
/// exponent routes through the escape path, -1 when the handle is null.
///
/// # Safety
/// `cb` must be null or a live handle from [`lexi_codebook_build`].
#[no_mangle]
pub unsafe extern "C" fn lexi_codebook_code_length(
    cb: *const LexiCodebook,
    exponent: u8,
) -> i32 {
    match cb.as_ref() {
        Some(cb) => match cb.inner.code_for(exponent) {
            Some(code) => code.len as i32,
            None => 0,
        },
        None => -1,
    }
}

/// Serializes the codebook wire header (count byte plus canonical
/// exponent/length pairs) into a fresh buffer.
///
/// # Safety
/// `cb` must be a live handle from [`lexi_codebook_build`] and `out` must
/// point to writable [`LexiBuffer`] storage.
#[no_mangle]
pub unsafe extern "C" fn lexi_codebook_header(
    cb: *const LexiCodebook,
    out: *mut LexiBuffer,
) -> LexiStatus {
    if out.is_null() {
        return LexiStatus::LexiNullArgument;
    }
    let Some(cb) = cb.as_ref() else {
        return LexiStatus::LexiNullArgument;
    };
    guarded(|| {
        out.write(buffer_from_vec(cb.inner.wire_header()));
        LexiStatus::LexiOk
    })
}

/// Releases a codebook handle. Null is a no-op.
///
/// # Safety
/// `cb` must be null or a handle from [`lexi_codebook_build`] that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn lexi_codebook_free(cb: *mut LexiCodebook) {
    if !cb.is_null() {
        drop(Box::from_raw(cb));
    }
}

/// Releases a buffer returned by this library and zeroes the struct so a
/// double free degrades to a no-op. Null is a no-op.
///
/// # Safety
/// `buf` must be null or point to a [`LexiBuffer`] previously filled in by
/// this library and not freed since.
#[no_mangle]
pub unsafe extern "C" fn lexi_buffer_free(buf: *mut LexiBuffer) {
    let Some(buf) = buf.as_mut() else {
        return;
    };
    if !buf.data.is_null() {
        drop(Vec::from_raw_parts(buf.data, buf.len, buf.cap));
    }
    buf.data = std::ptr::null_mut();
    buf.len = 0;
    buf.cap = 0;
}

/// Static name for a status code, for log lines.
#[no_mangle]
pub extern "C" fn lexi_status_name(status: LexiStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        LexiStatus::LexiOk => b"ok\0",
        LexiStatus::LexiNullArgument => b"null argument\0",
        LexiStatus::LexiInvalidInput => b"invalid input\0",
        LexiStatus::LexiCorruptData => b"corrupt data\0",
        LexiStatus::LexiInternal => b"internal error\0",
    };
    name.as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_buffer() -> LexiBuffer {
        LexiBuffer {
            data: std::ptr::null_mut(),
            len: 0,
            cap: 0,
        }
    }

    unsafe fn buffer_bytes(buf: &LexiBuffer) -> Vec<u8> {
        std::slice::from_raw_parts(buf.data, buf.len).to_vec()
    }

    #[test]
    fn compress_decompress_round_trip_through_the_abi() {
        let values: Vec<u16> = (0..2000u32)
            .map(|i| (i.wrapping_mul(40503) & 0xFFFF) as u16)
            .collect();
        unsafe {
            let mut packed = empty_buffer();
            let status = lexi_compress_bf16(values.as_ptr(), values.len(), &mut packed);
            assert_eq!(status, LexiStatus::LexiOk);
            assert!(packed.len > 0);

            let mut raw = empty_buffer();
            let status = lexi_decompress(packed.data, packed.len, &mut raw);
            assert_eq!(status, LexiStatus::LexiOk);
            let bytes = buffer_bytes(&raw);
            assert_eq!(bytes, lexi_core::io::bf16_to_bytes(&values));

            lexi_buffer_free(&mut packed);
            lexi_buffer_free(&mut raw);
            assert!(packed.data.is_null());
            // Freeing again is a no-op, not a double free.
            lexi_buffer_free(&mut packed);
            lexi_buffer_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn empty_stream_compresses_to_a_valid_container() {
        unsafe {
            let mut packed = empty_buffer();
            let status = lexi_compress_bf16(std::ptr::null(), 0, &mut packed);
            assert_eq!(status, LexiStatus::LexiOk);
            let mut raw = empty_buffer();
            assert_eq!(
                lexi_decompress(packed.data, packed.len, &mut raw),
                LexiStatus::LexiOk
            );
            assert_eq!(raw.len, 0);
            lexi_buffer_free(&mut packed);
            lexi_buffer_free(&mut raw);
        }
    }

    #[test]
    fn null_arguments_are_reported_not_dereferenced() {
        unsafe {
            let mut buf = empty_buffer();
            assert_eq!(
                lexi_compress_bf16(std::ptr::null(), 5, &mut buf),
                LexiStatus::LexiNullArgument
            );
            assert_eq!(
                lexi_compress_bf16([0u16].as_ptr(), 1, std::ptr::null_mut()),
                LexiStatus::LexiNullArgument
            );
            let mut profile = std::mem::MaybeUninit::<LexiProfile>::uninit();
            assert_eq!(
                lexi_profile(std::ptr::null(), 3, profile.as_mut_ptr()),
                LexiStatus::LexiNullArgument
            );
            let mut cb = std::ptr::null_mut();
            assert_eq!(
                lexi_codebook_build(std::ptr::null(), 9, &mut cb),
                LexiStatus::LexiNullArgument
            );
            assert_eq!(lexi_codebook_coded_count(std::ptr::null()), 0);
            assert_eq!(lexi_codebook_code_length(std::ptr::null(), 0x7C), -1);
        }
    }

    #[test]
    fn corrupt_and_invalid_inputs_map_to_distinct_statuses() {
        unsafe {
            let mut buf = empty_buffer();
            let junk = [0u8; 40];
            assert_eq!(
                lexi_decompress(junk.as_ptr(), junk.len(), &mut buf),
                LexiStatus::LexiCorruptData
            );

            let values = [0x3F80u16; 16];
            let mut packed = empty_buffer();
            assert_eq!(
                lexi_compress_bf16(values.as_ptr(), values.len(), &mut packed),
                LexiStatus::LexiOk
            );
            let mut truncated = buffer_bytes(&packed);
            truncated.pop();
            assert_eq!(
                lexi_decompress(truncated.as_ptr(), truncated.len(), &mut buf),
                LexiStatus::LexiCorruptData
            );
            lexi_buffer_free(&mut packed);

            let mut profile = std::mem::MaybeUninit::<LexiProfile>::uninit();
            assert_eq!(
                lexi_profile(values.as_ptr(), 0, profile.as_mut_ptr()),
                LexiStatus::LexiInvalidInput
            );
        }
    }

    #[test]
    fn profile_reports_field_entropies() {
        let values = [0x3F80u16; 100];
        unsafe {
            let mut profile = std::mem::MaybeUninit::<LexiProfile>::uninit();
            assert_eq!(
                lexi_profile(values.as_ptr(), values.len(), profile.as_mut_ptr()),
                LexiStatus::LexiOk
            );
            let profile = profile.assume_init();
            assert_eq!(profile.exponent_entropy_bits, 0.0);
            assert_eq!(profile.distinct_exponents, 1);
            assert_eq!(profile.total_values, 100);
        }
    }

    #[test]
    fn codebook_handle_lifecycle() {
        let exponents: Vec<u8> = (0..400).map(|i| 0x78 + (i % 6) as u8).collect();
        unsafe {
            let mut cb = std::ptr::null_mut();
            assert_eq!(
                lexi_codebook_build(exponents.as_ptr(), exponents.len(), &mut cb),
                LexiStatus::LexiOk
            );
            assert_eq!(lexi_codebook_coded_count(cb), 6);
            let coded_len = lexi_codebook_code_length(cb, 0x78);
            assert!((1..=32).contains(&coded_len));
            assert_eq!(lexi_codebook_code_length(cb, 0xF0), 0);

            let mut header = empty_buffer();
            assert_eq!(lexi_codebook_header(cb, &mut header), LexiStatus::LexiOk);
            let bytes = buffer_bytes(&header);
            assert_eq!(bytes[0], 6);
            assert_eq!(bytes.len(), 1 + 2 * 6);
            lexi_buffer_free(&mut header);
            lexi_codebook_free(cb);
            lexi_codebook_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn status_names_are_nul_terminated_statics() {
        for status in [
            LexiStatus::LexiOk,
            LexiStatus::LexiNullArgument,
            LexiStatus::LexiInvalidInput,
            LexiStatus::LexiCorruptData,
            LexiStatus::LexiInternal,
        ] {
            let ptr = lexi_status_name(status);
            let text = unsafe { std::ffi::CStr::from_ptr(ptr) };
            assert!(!text.to_str().unwrap().is_empty());
        }
    }
}
