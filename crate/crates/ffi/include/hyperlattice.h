#ifndef HYPERLATTICE_H
#define HYPERLATTICE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_ARGUMENT = 2,
  HL_STATUS_ENTRY_BOUND_EXCEEDED = 3,
  HL_STATUS_NO_DATA = 4,
  HL_STATUS_PANIC = 5,
} HlStatus;

// Opaque angle collection, sorted by `(c, a, d)`.
typedef struct HlAngles HlAngles;

// Opaque ball handle.
typedef struct HlBall HlBall;

// Matrix `(a, b; c, d)`.
typedef struct HlElement {
  int64_t a;
  int64_t b;
  int64_t c;
  int64_t d;
} HlElement;

typedef struct HlAngleSample {
  struct HlElement gamma;
  double theta;
  double dist;
} HlAngleSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer is
// valid until the next `hl_` call on the same thread.
const char *hl_last_error(void);

// Library version as a static NUL-terminated string.
const char *hl_version(void);

// Create a ball of `Γ(level)` around `x0 + i y0` with norm bound
// `Q² = norm_sq`. Entry bounds are checked here, not at enumeration.
//
// # Safety
// `out` must be valid for writes.
enum HlStatus hl_ball_new(uint32_t level,
                          double x0,
                          double y0,
                          double norm_sq,
                          struct HlBall **out);

// As [`hl_ball_new`] with `Q² = 2 cosh(radius)`.
//
// # Safety
// `out` must be valid for writes.
enum HlStatus hl_ball_from_radius(uint32_t level,
                                  double x0,
                                  double y0,
                                  double radius,
                                  struct HlBall **out);

// # Safety
// `ball` must be null or a handle from `hl_ball_new` not yet freed.
void hl_ball_free(struct HlBall *ball);

// Number of group elements in the ball. `workers_count = 0` uses every core.
//
// # Safety
// `ball` must be a live handle; `out` valid for writes.
enum HlStatus hl_ball_count(const struct HlBall *ball, uint32_t workers_count, uint64_t *out);

// Angles seen from `x1 + i y1` for every element of the ball.
//
// # Safety
// `ball` must be a live handle; `out` valid for writes.
enum HlStatus hl_ball_angles(const struct HlBall *ball,
                             double x1,
                             double y1,
                             uint32_t workers_count,
                             struct HlAngles **out);

// # Safety
// `angles` must be null or a live handle.
void hl_angles_free(struct HlAngles *angles);

// Number of samples with a defined angle; 0 for a null handle.
//
// # Safety
// `angles` must be null or a live handle.
size_t hl_angles_len(const struct HlAngles *angles);

// Elements whose angle is undefined; 0 for a null handle.
//
// # Safety
// `angles` must be null or a live handle.
uint64_t hl_angles_undefined(const struct HlAngles *angles);

// # Safety
// `angles` must be a live handle; `out` valid for writes.
enum HlStatus hl_angles_get(const struct HlAngles *angles, size_t index, struct HlAngleSample *out);

// Kolmogorov–Smirnov distance between the samples and the limiting CDF.
//
// # Safety
// `angles` must be a live handle; `out` valid for writes.
enum HlStatus hl_angles_ks(const struct HlAngles *angles, double *out);

// Limiting angle CDF at `omega` for normalized target `(x_star, y_star)`.
//
// # Safety
// `out` must be valid for writes.
enum HlStatus hl_xi(double x_star, double y_star, double omega, double *out);

// Angle density `ρ(t)` for base point `z0` and observation point `z1`.
//
// # Safety
// `out` must be valid for writes.
enum HlStatus hl_density(double x0, double y0, double x1, double y1, double t, double *out);

// Complete Kloosterman sum `S(m, n; q)`.
//
// # Safety
// `re` and `im` must be valid for writes.
enum HlStatus hl_kloosterman(int64_t m, int64_t n, uint64_t q, double *re, double *im);

// `τ(q) gcd(m, n, q)^{1/2} q^{1/2}`.
//
// # Safety
// `out` must be valid for writes.
enum HlStatus hl_weil_bound(int64_t m, int64_t n, uint64_t q, double *out);

// Index of `Γ(level)` in `SL₂(ℤ)`.
//
// # Safety
// `out` must be valid for writes.
enum HlStatus hl_index(uint32_t level, uint64_t *out);

// `C_N` as a double.
//
// # Safety
// `out` must be valid for writes.
enum HlStatus hl_c_n(uint32_t level, double *out);

// Sector count with slope bound `beta` (±INFINITY allowed).
//
// # Safety
// `out` must be valid for writes.
enum HlStatus hl_count_sector(uint32_t level,
                              double x0,
                              double y0,
                              double norm_sq,
                              double beta,
                              uint32_t workers_count,
                              uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERLATTICE_H */
