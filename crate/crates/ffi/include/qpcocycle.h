#ifndef QPCOCYCLE_H
#define QPCOCYCLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. `QP_STATUS_OK` is zero; everything else is an error.
typedef enum QpStatus {
  QP_STATUS_OK = 0,
  QP_STATUS_NULL_POINTER = 1,
  QP_STATUS_INVALID_UTF8 = 2,
  QP_STATUS_CONFIG_INVALID = 3,
  // A numerical routine refused its input or failed; see the message.
  QP_STATUS_COMPUTATION_FAILED = 4,
  QP_STATUS_OUT_OF_RANGE = 5,
  QP_STATUS_PANIC = 6,
} QpStatus;

// Continued-fraction expansion.
typedef struct QpCf QpCf;

// Cocycle over a circle rotation.
typedef struct QpCocycle QpCocycle;

// One row of a continued-fraction table.
typedef struct QpCfRow {
  size_t k;
  int64_t a;
  int64_t p;
  int64_t q;
  double beta;
  double alpha_k;
} QpCfRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next call into the library from the same thread.
const char *qp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *qp_version(void);

// Build a cocycle from its JSON document. On success `*out` owns a handle to
// be released with [`qp_cocycle_free`].
//
// # Safety
// `json` must be NUL-terminated; `out` must be writable.
enum QpStatus qp_cocycle_from_json(const char *json, struct QpCocycle **out);

// # Safety
// `c` must come from [`qp_cocycle_from_json`] and not be used afterwards.
void qp_cocycle_free(struct QpCocycle *c);

// # Safety
// `c` must be a live handle and `out` writable.
enum QpStatus qp_cocycle_alpha(const struct QpCocycle *c, double *out);

// Winding number of the map.
//
// # Safety
// `c` must be a live handle and `out` writable.
enum QpStatus qp_degree(const struct QpCocycle *c, int64_t *out);

// Fibered rotation number (mod 1) from `iterations` steps of the orbit of
// `(0, 0)`. Fails for maps of nonzero degree.
//
// # Safety
// `c` must be a live handle and `out` writable.
enum QpStatus qp_rotation_number(const struct QpCocycle *c, size_t iterations, double *out);

// Lyapunov exponent averaged over `samples` equidistributed base points.
//
// # Safety
// `c` must be a live handle and `out` writable.
enum QpStatus qp_lyapunov(const struct QpCocycle *c,
                          size_t iterations,
                          size_t samples,
                          double *out);

// Expand `alpha` to at most `depth` partial quotients; stops early on a
// rational remainder.
//
// # Safety
// `out` must be writable.
enum QpStatus qp_cf_expand(double alpha, size_t depth, struct QpCf **out);

// # Safety
// `cf` must come from [`qp_cf_expand`] and not be used afterwards.
void qp_cf_free(struct QpCf *cf);

// Largest valid row index.
//
// # Safety
// `cf` must be a live handle and `out` writable.
enum QpStatus qp_cf_depth(const struct QpCf *cf, size_t *out);

// Row `k` of the table. Convergents that do not fit 64 bits give
// `QP_STATUS_OUT_OF_RANGE`.
//
// # Safety
// `cf` must be a live handle and `out` writable.
enum QpStatus qp_cf_row(const struct QpCf *cf, size_t k, struct QpCfRow *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPCOCYCLE_H */
