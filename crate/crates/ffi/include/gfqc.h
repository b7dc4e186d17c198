/* Generated by cbindgen. Do not edit. */

#ifndef GFQC_H
#define GFQC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call.
 */
typedef enum GfqcStatus {
  GFQC_STATUS_OK = 0,
  GFQC_STATUS_NULL_POINTER = 1,
  GFQC_STATUS_INVALID_ARGUMENT = 2,
  GFQC_STATUS_CONSTRUCTION = 3,
  GFQC_STATUS_DIMENSION = 4,
  GFQC_STATUS_FORMAT = 5,
  GFQC_STATUS_MISMATCH = 6,
  GFQC_STATUS_IO = 7,
  GFQC_STATUS_PANIC = 8,
} GfqcStatus;

/**
 * Opaque codec handle.
 */
typedef struct GfqcCodec GfqcCodec;

typedef struct GfqcCodecInfo {
  uint8_t p;
  uint32_t q;
  size_t n_sym;
  /**
   * Checks before reduction.
   */
  size_t m_sym;
  size_t b;
  uint64_t seed;
  /**
   * Source bits per block.
   */
  size_t block_bits;
  /**
   * Compressed payload bits per block.
   */
  size_t payload_bits;
  double rate;
} GfqcCodecInfo;

typedef struct GfqcEncodeParams {
  /**
   * Prior strength L.
   */
  double strength;
  double gamma0;
  double gamma1;
  size_t ell_max;
  size_t t_max;
  double epsilon;
  uint64_t schedule_seed;
} GfqcEncodeParams;

/**
 * Bytes owned by the library.
 */
typedef struct GfqcBuffer {
  uint8_t *data;
  size_t len;
} GfqcBuffer;

typedef struct GfqcEncodeReport {
  double distortion;
  size_t iterations;
  size_t trials;
  /**
   * Nonzero when the block was stored raw.
   */
  uint8_t fallback;
} GfqcEncodeReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * call into the library from the same thread.
 */
const char *gfqc_last_error(void);

/**
 * Library version as a static string.
 */
const char *gfqc_version(void);

/**
 * Builds a code from its construction tuple.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum GfqcStatus gfqc_codec_new(uint8_t p,
                               size_t nbits,
                               double rate,
                               size_t b,
                               uint64_t seed,
                               struct GfqcCodec **out);

/**
 * Reads a code file written by `gfqc gen-code`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` valid for a pointer write.
 */
enum GfqcStatus gfqc_codec_from_file(const char *path, struct GfqcCodec **out);

/**
 * # Safety
 * `codec` must come from a `gfqc_codec_*` constructor and not be used
 * afterwards. Null is ignored.
 */
void gfqc_codec_free(struct GfqcCodec *codec);

/**
 * # Safety
 * `codec` must be a live handle; `out` valid for a write.
 */
enum GfqcStatus gfqc_codec_info(const struct GfqcCodec *codec, struct GfqcCodecInfo *out);

/**
 * Default encoder settings.
 */
struct GfqcEncodeParams gfqc_encode_params_default(void);

/**
 * Compresses `n_bits` source bits packed MSB-first in `bits`. On success
 * `out` holds the block stream. `params` and `report` may be null.
 *
 * # Safety
 * `bits` must point to `ceil(n_bits / 8)` readable bytes; `out` and a
 * non-null `report` must be valid for writes.
 */
enum GfqcStatus gfqc_compress(const struct GfqcCodec *codec,
                              const uint8_t *bits,
                              size_t n_bits,
                              const struct GfqcEncodeParams *params,
                              struct GfqcBuffer *out,
                              struct GfqcEncodeReport *report);

/**
 * Decodes a block stream. With a null `codec` the code is rebuilt from the
 * block header. On success `out` holds the bits packed MSB-first and
 * `n_bits` their count. `fallback` may be null.
 *
 * # Safety
 * `stream` must point to `len` readable bytes; `out` and `n_bits` must be
 * valid for writes.
 */
enum GfqcStatus gfqc_decompress(const struct GfqcCodec *codec,
                                const uint8_t *stream,
                                size_t len,
                                struct GfqcBuffer *out,
                                size_t *n_bits,
                                uint8_t *fallback);

/**
 * Releases a buffer returned by the library and resets it to empty.
 *
 * # Safety
 * `buf` must be null or point to a buffer filled by this library that has
 * not been freed.
 */
void gfqc_buffer_free(struct GfqcBuffer *buf);

/**
 * Shannon distortion bound `D*` for rate `rate` in `[0, 1]`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum GfqcStatus gfqc_rd_bound(double rate, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GFQC_H */
