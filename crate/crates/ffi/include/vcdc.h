#ifndef VCDC_H
#define VCDC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum VcdcStatus {
  VCDC_STATUS_OK = 0,
  VCDC_STATUS_NULL_POINTER = 1,
  VCDC_STATUS_INVALID_ARGUMENT = 2,
  VCDC_STATUS_PARSE = 3,
  VCDC_STATUS_DIMENSION = 4,
  VCDC_STATUS_IO = 5,
  VCDC_STATUS_INTERNAL = 6,
} VcdcStatus;

// A parsed parity-check matrix.
typedef struct VcdcCode VcdcCode;

// Trained neural-block weights bound to one code shape.
typedef struct VcdcModel VcdcModel;

// Per-decode summary.
typedef struct VcdcDecodeInfo {
  // BP iterations or reverse steps actually run.
  size_t steps_used;
  // Unsatisfied parity checks of the returned word.
  size_t parity_errors;
  // 1 when the returned word is a codeword, else 0.
  uint8_t syndrome_zero;
} VcdcDecodeInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *vcdc_last_error(void);

// Noise standard deviation for a rate-`k/n` code at `csnr_db`.
//
// # Safety
// `out` must be a valid pointer to a `double`.
enum VcdcStatus vcdc_noise_scale(double csnr_db, size_t k, size_t n, double *out);

// Parses alist text into a new code handle.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum VcdcStatus vcdc_code_from_alist(const char *text, struct VcdcCode **out);

// Reads an alist file into a new code handle.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum VcdcStatus vcdc_code_load(const char *path, struct VcdcCode **out);

// Releases a code handle; null is ignored.
//
// # Safety
// `code` must come from this library and not be used afterwards.
void vcdc_code_free(struct VcdcCode *code);

// Code length, or 0 for null.
//
// # Safety
// `code` must be null or a live handle.
size_t vcdc_code_n(const struct VcdcCode *code);

// Code dimension, or 0 for null.
//
// # Safety
// `code` must be null or a live handle.
size_t vcdc_code_k(const struct VcdcCode *code);

// Parses checkpoint text for `code` into a new model handle.
//
// # Safety
// `code` must be a live handle, `text` NUL-terminated and `out` valid.
enum VcdcStatus vcdc_model_from_checkpoint(const struct VcdcCode *code,
                                           const char *text,
                                           struct VcdcModel **out);

// Reads a checkpoint file for `code` into a new model handle.
//
// # Safety
// `code` must be a live handle, `path` NUL-terminated and `out` valid.
enum VcdcStatus vcdc_model_load(const struct VcdcCode *code,
                                const char *path,
                                struct VcdcModel **out);

// Releases a model handle; null is ignored.
//
// # Safety
// `model` must come from this library and not be used afterwards.
void vcdc_model_free(struct VcdcModel *model);

// Flooding BP on `len` channel LLRs. `min_sum` selects the min-sum check
// rule instead of sum-product. Writes `n` bits to `bits_out`; `info` may
// be null.
//
// # Safety
// `llr` must hold `len` doubles, `bits_out` room for `n` bytes.
enum VcdcStatus vcdc_decode_bp(const struct VcdcCode *code,
                               const double *llr,
                               size_t len,
                               size_t max_iters,
                               uint8_t min_sum,
                               uint8_t *bits_out,
                               struct VcdcDecodeInfo *info);

// Reverse-diffusion decode of LLRs observed at `csnr_db`, with `steps`
// levels spaced `step_db` apart. Writes `n` bits to `bits_out`; `info` may
// be null.
//
// # Safety
// `llr` must hold `len` doubles, `bits_out` room for `n` bytes; handles
// must be live.
enum VcdcStatus vcdc_decode_vcdc(const struct VcdcCode *code,
                                 const struct VcdcModel *model,
                                 const double *llr,
                                 size_t len,
                                 double csnr_db,
                                 size_t steps,
                                 double step_db,
                                 uint8_t *bits_out,
                                 struct VcdcDecodeInfo *info);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VCDC_H */
