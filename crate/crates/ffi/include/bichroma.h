#ifndef BICHROMA_H
#define BICHROMA_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum BichromaStatus {
  BICHROMA_STATUS_OK = 0,
  BICHROMA_STATUS_NULL_POINTER = 1,
  BICHROMA_STATUS_INVALID_INPUT = 2,
  BICHROMA_STATUS_NO_CONVERGENCE = 3,
  BICHROMA_STATUS_DIMENSION_OVERFLOW = 4,
  BICHROMA_STATUS_INDEX_OUT_OF_RANGE = 6,
  BICHROMA_STATUS_PANIC = 7,
} BichromaStatus;

/**
 * Backend selector.
 */
typedef enum BichromaMethod {
  BICHROMA_METHOD_CHRW = 0,
  BICHROMA_METHOD_RWA = 1,
  BICHROMA_METHOD_GFT = 2,
  BICHROMA_METHOD_RK = 3,
} BichromaMethod;

/**
 * Opaque drive parameter set.
 */
typedef struct BichromaParams BichromaParams;

/**
 * Opaque list of located resonances.
 */
typedef struct BichromaResonances BichromaResonances;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bichroma_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *bichroma_last_error(void);

/**
 * Create a parameter set. Frequencies are in any common unit.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum BichromaStatus bichroma_params_new(double omega0,
                                        double a1,
                                        double a2,
                                        double omega1,
                                        double omega2,
                                        double phi1,
                                        double phi2,
                                        struct BichromaParams **out);

/**
 * Release a parameter set; null is ignored.
 *
 * # Safety
 * `p` must come from [`bichroma_params_new`] and not be used afterwards.
 */
void bichroma_params_free(struct BichromaParams *p);

/**
 * Solve the CHRW parameters ξ₁, ξ₂.
 *
 * # Safety
 * All pointers must be valid.
 */
enum BichromaStatus bichroma_solve_xi(const struct BichromaParams *p, double *xi1, double *xi2);

/**
 * Long-time average `P̄` for the chosen backend (not RK).
 *
 * # Safety
 * All pointers must be valid.
 */
enum BichromaStatus bichroma_averaged(const struct BichromaParams *p,
                                      enum BichromaMethod method,
                                      double *p_bar);

/**
 * Resonance indicator `d` (real part) for CHRW or RWA.
 *
 * # Safety
 * All pointers must be valid.
 */
enum BichromaStatus bichroma_indicator(const struct BichromaParams *p,
                                       enum BichromaMethod method,
                                       double *d);

/**
 * Transition probability `P(t, t₀)` on `n` ascending times, written to `out`.
 *
 * # Safety
 * `times` and `out` must each point to `n` doubles.
 */
enum BichromaStatus bichroma_transient(const struct BichromaParams *p,
                                       enum BichromaMethod method,
                                       double t0,
                                       const double *times,
                                       size_t n,
                                       double *out);

/**
 * Locate resonances in `[lo, hi]` by scanning `scan_points` values of ω₀.
 * Pass `r` as NaN to keep `A₂` fixed, otherwise `A₂ = r·A₁`.
 *
 * # Safety
 * `p` and `out` must be valid pointers.
 */
enum BichromaStatus bichroma_find_resonances(const struct BichromaParams *p,
                                             double r,
                                             double lo,
                                             double hi,
                                             size_t scan_points,
                                             enum BichromaMethod method,
                                             struct BichromaResonances **out);

/**
 * Number of resonances in a list; 0 for null.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t bichroma_resonances_len(const struct BichromaResonances *h);

/**
 * Read entry `i`. `photon_order` is set to 0 when it is unknown.
 *
 * # Safety
 * All pointers must be valid.
 */
enum BichromaStatus bichroma_resonances_get(const struct BichromaResonances *h,
                                            size_t i,
                                            double *omega0_star,
                                            uint32_t *photon_order,
                                            bool *resolved);

/**
 * Release a resonance list; null is ignored.
 *
 * # Safety
 * `h` must come from [`bichroma_find_resonances`] and not be used afterwards.
 */
void bichroma_resonances_free(struct BichromaResonances *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BICHROMA_H */
