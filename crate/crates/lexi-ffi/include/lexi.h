/* C interface to the lexi BF16 exponent compression codec. */

#ifndef LEXI_H
#define LEXI_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call in this ABI.
typedef enum LexiStatus {
  LEXI_OK = 0,
  // A required pointer argument was null.
  LEXI_NULL_ARGUMENT = 1,
  // Arguments were readable but semantically unusable (e.g. empty input
  // where values are required).
  LEXI_INVALID_INPUT = 2,
  // Input bytes do not form a valid compressed stream.
  LEXI_CORRUPT_DATA = 3,
  // Unexpected internal failure; the library state is still sound.
  LEXI_INTERNAL = 4,
} LexiStatus;

// Opaque exponent codebook handle.
typedef struct LexiCodebook LexiCodebook;

// A heap buffer owned by the caller after a successful call.
typedef struct LexiBuffer {
  uint8_t *data;
  size_t len;
  size_t cap;
} LexiBuffer;

// Field entropy summary of a BF16 stream, bits per field.
typedef struct LexiProfile {
  double sign_entropy_bits;
  double exponent_entropy_bits;
  double mantissa_entropy_bits;
  uint64_t distinct_exponents;
  uint64_t total_values;
} LexiProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Compresses `value_count` BF16 words into a self-describing container.
//
// On success `*out` holds the container bytes; free with
// [`lexi_buffer_free`]. An empty input is allowed and produces a minimal
// valid container.
//
// # Safety
// `values` must point to `value_count` readable `uint16_t`s (or be anything
// when `value_count` is 0), and `out` must point to writable
// [`LexiBuffer`] storage.
enum LexiStatus lexi_compress_bf16(const uint16_t *values,
                                   size_t value_count,
                                   struct LexiBuffer *out);

// Decompresses a container back into little-endian BF16 bytes
// (2 bytes per value).
//
// # Safety
// `data` must point to `len` readable bytes (or be anything when `len` is
// 0), and `out` must point to writable [`LexiBuffer`] storage.
enum LexiStatus lexi_decompress(const uint8_t *data, size_t len, struct LexiBuffer *out);

// Computes per-field entropies of a BF16 stream.
//
// # Safety
// `values` must point to `value_count` readable `uint16_t`s and `out` to
// writable [`LexiProfile`] storage.
enum LexiStatus lexi_profile(const uint16_t *values, size_t value_count, struct LexiProfile *out);

// Builds a canonical codebook from a full exponent stream and returns an
// owned handle through `out`.
//
// # Safety
// `exponents` must point to `count` readable bytes and `out` to a writable
// pointer slot. The returned handle must be released with
// [`lexi_codebook_free`].
enum LexiStatus lexi_codebook_build(const uint8_t *exponents,
                                    size_t count,
                                    struct LexiCodebook **out);

// Number of exponent values with dedicated codewords (at most 32).
// Returns 0 when the handle is null.
//
// # Safety
// `cb` must be null or a live handle from [`lexi_codebook_build`].
uint32_t lexi_codebook_coded_count(const struct LexiCodebook *cb);

// Codeword length in bits for an exponent: 1..=32 when coded, 0 when the
// exponent routes through the escape path, -1 when the handle is null.
//
// # Safety
// `cb` must be null or a live handle from [`lexi_codebook_build`].
int32_t lexi_codebook_code_length(const struct LexiCodebook *cb, uint8_t exponent);

// Serializes the codebook wire header (count byte plus canonical
// exponent/length pairs) into a fresh buffer.
//
// # Safety
// `cb` must be a live handle from [`lexi_codebook_build`] and `out` must
// point to writable [`LexiBuffer`] storage.
enum LexiStatus lexi_codebook_header(const struct LexiCodebook *cb, struct LexiBuffer *out);

// Releases a codebook handle. Null is a no-op.
//
// # Safety
// `cb` must be null or a handle from [`lexi_codebook_build`] that has not
// been freed already.
void lexi_codebook_free(struct LexiCodebook *cb);

// Releases a buffer returned by this library and zeroes the struct so a
// double free degrades to a no-op. Null is a no-op.
//
// # Safety
// `buf` must be null or point to a [`LexiBuffer`] previously filled in by
// this library and not freed since.
void lexi_buffer_free(struct LexiBuffer *buf);

// Static name for a status code, for log lines.
const char *lexi_status_name(enum LexiStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEXI_H */
