/* Generated by cbindgen from pointderiv-ffi. Do not edit. */

#ifndef POINTDERIV_H
#define POINTDERIV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PdLimitVerdict {
  PD_LIMIT_VERDICT_CONVERGED = 0,
  PD_LIMIT_VERDICT_NOT_CONVERGED = 1,
  PD_LIMIT_VERDICT_INCONCLUSIVE = 2,
} PdLimitVerdict;

/*
 Status code returned by every fallible entry point.
 */
typedef enum PdStatus {
  PD_STATUS_OK = 0,
  PD_STATUS_NULL_POINTER = 1,
  PD_STATUS_INVALID_ARGUMENT = 2,
  PD_STATUS_INVALID_DOMAIN = 3,
  PD_STATUS_OUTSIDE_DOMAIN = 4,
  PD_STATUS_SINGULAR = 5,
  PD_STATUS_NUMERICAL = 6,
  PD_STATUS_PANIC = 7,
} PdStatus;

typedef enum PdVerdict {
  PD_VERDICT_BPD_SUFFICIENT = 0,
  PD_VERDICT_DIVERGENT_UPPER_BOUND = 1,
  PD_VERDICT_INCONCLUSIVE = 2,
} PdVerdict;

/*
 Opaque Swiss-cheese domain.
 */
typedef struct PdDomain PdDomain;

/*
 Opaque Lipschitz test function.
 */
typedef struct PdFunction PdFunction;

typedef struct PdComplex {
  double re;
  double im;
} PdComplex;

/*
 Summary of the content series. `total_upper` is NaN when no tail bound exists.
 */
typedef struct PdCriterionSummary {
  enum PdVerdict verdict;
  uint32_t terms;
  double partial_sum;
  double total_upper;
} PdCriterionSummary;

typedef struct PdLimitSummary {
  enum PdLimitVerdict verdict;
  struct PdComplex derivative;
  struct PdComplex estimated_limit;
  double final_deviation;
  double convergence_order;
} PdLimitSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length without the NUL, or 0
 when there is no error.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t pd_last_error_message(char *buf, size_t len);

/*
 The unit disk punctured at the origin.

 # Safety
 `out` must be valid for a pointer write.
 */
enum PdStatus pd_domain_punctured_disk(struct PdDomain **out);

/*
 Unit disk minus the holes `c_n = center_scale·center_ratio^n` at angle
 `angle`, radius `radius_scale·radius_ratio^n`, up to `truncation`.

 # Safety
 `out` must be valid for a pointer write.
 */
enum PdStatus pd_domain_roadrunner(double center_scale,
                                   double center_ratio,
                                   double radius_scale,
                                   double radius_ratio,
                                   double angle,
                                   uint32_t truncation,
                                   struct PdDomain **out);

/*
 Outer disk minus `hole_count` closed holes with base point `base`.

 # Safety
 `hole_centers` and `hole_radii` must be valid for `hole_count` reads and
 `out` for a pointer write.
 */
enum PdStatus pd_domain_new(struct PdComplex outer_center,
                            double outer_radius,
                            const struct PdComplex *hole_centers,
                            const double *hole_radii,
                            size_t hole_count,
                            struct PdComplex base,
                            bool puncture,
                            struct PdDomain **out);

/*
 # Safety
 `domain` must be a live handle or null; `out` must be valid for a write.
 */
enum PdStatus pd_domain_contains(const struct PdDomain *domain, struct PdComplex z, bool *out);

/*
 Number of holes, or 0 for a null handle.

 # Safety
 `domain` must be a live handle or null.
 */
size_t pd_domain_hole_count(const struct PdDomain *domain);

/*
 # Safety
 `domain` must come from a `pd_domain_*` constructor and not be used afterwards.
 */
void pd_domain_free(struct PdDomain *domain);

/*
 `Σ coeffs[k] z^k`.

 # Safety
 `coeffs` must be valid for `len` reads and `out` for a pointer write.
 */
enum PdStatus pd_function_polynomial(const struct PdComplex *coeffs,
                                     size_t len,
                                     struct PdFunction **out);

/*
 `weight / (z - pole)`.

 # Safety
 `out` must be valid for a pointer write.
 */
enum PdStatus pd_function_pole(struct PdComplex pole,
                               struct PdComplex weight,
                               struct PdFunction **out);

/*
 `weight` times the Cauchy transform of the area measure on a closed disk.

 # Safety
 `out` must be valid for a pointer write.
 */
enum PdStatus pd_function_cauchy_transform(struct PdComplex center,
                                           double radius,
                                           struct PdComplex weight,
                                           struct PdFunction **out);

/*
 `a·f + b·g`.

 # Safety
 `f` and `g` must be live handles and `out` valid for a pointer write.
 */
enum PdStatus pd_function_combine(struct PdComplex a,
                                  const struct PdFunction *f,
                                  struct PdComplex b,
                                  const struct PdFunction *g,
                                  struct PdFunction **out);

/*
 The same function shifted so that it vanishes at `base`.

 # Safety
 `f` must be a live handle and `out` valid for a pointer write.
 */
enum PdStatus pd_function_with_base_point(const struct PdFunction *f,
                                          struct PdComplex base,
                                          struct PdFunction **out);

/*
 # Safety
 `f` must be a live handle and `out` valid for a write.
 */
enum PdStatus pd_function_eval(const struct PdFunction *f,
                               struct PdComplex z,
                               struct PdComplex *out);

/*
 # Safety
 `f` must be a live handle and `out` valid for a write.
 */
enum PdStatus pd_function_derivative(const struct PdFunction *f,
                                     struct PdComplex z,
                                     struct PdComplex *out);

/*
 # Safety
 `f` must come from a `pd_function_*` constructor and not be used afterwards.
 */
void pd_function_free(struct PdFunction *f);

/*
 Weighted content series `Σ 4^n M_{1+α}(A_n \ U)` for `n ≤ n_max`.

 # Safety
 `domain` must be a live handle and `out` valid for a write.
 */
enum PdStatus pd_criterion(const struct PdDomain *domain,
                           double alpha,
                           uint32_t n_max,
                           struct PdCriterionSummary *out);

/*
 Difference quotient at `x` computed from the Cauchy integral over the
 keyhole between `|z - x0| = 2^{-n_inner}` and `2^{-m_outer}` inside the cone.

 # Safety
 Handles must be live; `out` and `error_estimate` valid for writes
 (`error_estimate` may be null).
 */
enum PdStatus pd_quotient_via_cauchy(const struct PdFunction *f,
                                     const struct PdDomain *domain,
                                     struct PdComplex x,
                                     double cone_direction,
                                     double cone_half_angle,
                                     double cone_length,
                                     uint32_t n_inner,
                                     uint32_t m_outer,
                                     double tol,
                                     struct PdComplex *out,
                                     double *error_estimate);

/*
 Difference quotients along the dyadic samples of a ray from the base point.

 # Safety
 Handles must be live and `out` valid for a write.
 */
enum PdStatus pd_nontangential_limit(const struct PdFunction *f,
                                     const struct PdDomain *domain,
                                     double direction,
                                     double length,
                                     uint32_t scales,
                                     double limit_tol,
                                     struct PdLimitSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POINTDERIV_H */
