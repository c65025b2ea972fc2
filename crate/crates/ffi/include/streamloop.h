#ifndef STREAMLOOP_H
#define STREAMLOOP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. `Ok` is zero; everything else is an error.
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_PARAMETER = 1,
  SL_STATUS_SHAPE = 2,
  SL_STATUS_EMPTY_INPUT = 3,
  SL_STATUS_ORDERING = 4,
  SL_STATUS_CONSISTENCY = 5,
  SL_STATUS_NUMERIC = 6,
  SL_STATUS_RANGE = 7,
  SL_STATUS_PARSE = 8,
  SL_STATUS_RESOURCE = 9,
  SL_STATUS_IO = 10,
  // A required pointer was null.
  SL_STATUS_NULL_POINTER = 11,
  // A string argument was not valid UTF-8, or a length did not match.
  SL_STATUS_INVALID_ARGUMENT = 12,
  SL_STATUS_PANIC = 13,
} SlStatus;

// Opaque synchronization schedule.
typedef struct SlSchedule SlSchedule;

// Opaque transform handle.
typedef struct SlTransform SlTransform;

// Opaque streaming driver: a transform plus its params and current state.
typedef struct SlUnroller SlUnroller;

// Tensor shape: `rank` 0 is a scalar, 1 a vector of `rows` values, 2 a
// `rows x cols` matrix (row-major).
typedef struct SlShape {
  uint32_t rank;
  size_t rows;
  size_t cols;
} SlShape;

// One secondary stream for [`sl_sync_trace`]. `window == 0` selects
// forward fill, otherwise a window of that many rows.
typedef struct SlStreamSpec {
  const char *name;
  const int64_t *timestamps;
  size_t len;
  int64_t latency_ns;
  size_t window;
} SlStreamSpec;

// What one stream contributes at one step. Rows `start..end` of the
// stream are read after `pad` NaN rows; `overflow` events were dropped.
// A forward-fill slot with no visible event has `start == end` and
// `pad == 1`.
typedef struct SlSlot {
  bool is_window;
  size_t start;
  size_t end;
  size_t pad;
  size_t overflow;
} SlSlot;

// Timestamp split into two 32-bit words; compares like the original
// value under (hi, lo) lexicographic order.
typedef struct SlEncodedTime {
  int32_t hi;
  uint32_t lo;
} SlEncodedTime;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *sl_version(void);

// Copies the calling thread's last error message into `buf` (truncated,
// always NUL-terminated when `cap > 0`) and returns the full message
// length excluding the terminator.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
size_t sl_last_error_message(char *buf, size_t cap);

// Builds a transform from pipeline configuration text (`op = ...` blocks;
// `timestamp`, `columns` and `seed` settings are ignored here). An empty
// pipeline is the identity.
//
// # Safety
// `config` must be a NUL-terminated string; `out` must be writable.
enum SlStatus sl_transform_parse(const char *config, struct SlTransform **out);

// # Safety
// `t` must be null or a handle from [`sl_transform_parse`] not yet freed.
void sl_transform_free(struct SlTransform *t);

// Output shape of `t` for the given input shape.
//
// # Safety
// `t` must be a live handle; `out` must be writable.
enum SlStatus sl_transform_output_shape(const struct SlTransform *t,
                                        struct SlShape input,
                                        struct SlShape *out);

// Starts a streaming run of `t` from `init(seed, input)`. The unroller
// keeps its own reference to the transform, which may be freed afterwards.
//
// # Safety
// `t` must be a live handle; `out` must be writable.
enum SlStatus sl_unroller_new(const struct SlTransform *t,
                              uint64_t seed,
                              struct SlShape input,
                              struct SlUnroller **out);

// Independent copy of `u` at its current state; stepping either one
// leaves the other untouched.
//
// # Safety
// `u` must be a live handle; `out` must be writable.
enum SlStatus sl_unroller_clone(const struct SlUnroller *u, struct SlUnroller **out);

// # Safety
// `u` must be null or a live handle.
void sl_unroller_free(struct SlUnroller *u);

// # Safety
// `u` must be a live handle; `out` must be writable.
enum SlStatus sl_unroller_output_shape(const struct SlUnroller *u, struct SlShape *out);

// Feeds `steps` consecutive input rows (`steps * input_len` values,
// row-major) and writes `steps * output_len` values to `output`. On error
// the rows before the failing one have been applied and written, and the
// unroller cannot be stepped again.
//
// # Safety
// `input` and `output` must point to arrays of the stated lengths.
enum SlStatus sl_unroller_step(struct SlUnroller *u,
                               const double *input,
                               size_t input_len,
                               double *output,
                               size_t output_len,
                               size_t steps);

// Traces the synchronization schedule of `n_streams` secondary streams
// onto `local` timestamps (nanoseconds).
//
// # Safety
// `local` must hold `n_local` values, `streams` `n_streams` specs whose
// pointers are valid for their lengths; `out` must be writable.
enum SlStatus sl_sync_trace(const int64_t *local,
                            size_t n_local,
                            const struct SlStreamSpec *streams,
                            size_t n_streams,
                            struct SlSchedule **out);

// # Safety
// `s` must be null or a live handle.
void sl_schedule_free(struct SlSchedule *s);

// Number of local steps; 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
size_t sl_schedule_steps(const struct SlSchedule *s);

// Slot of stream `stream` (in the order passed to [`sl_sync_trace`]) at
// local step `step`.
//
// # Safety
// `s` must be a live handle; `out` must be writable.
enum SlStatus sl_schedule_slot(const struct SlSchedule *s,
                               size_t stream,
                               size_t step,
                               struct SlSlot *out);

struct SlEncodedTime sl_encode_time(int64_t ns);

int64_t sl_decode_time(struct SlEncodedTime e);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STREAMLOOP_H */
