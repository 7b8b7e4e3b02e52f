#ifndef PRABHAKAR_H
#define PRABHAKAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Built-in ψ families; see [`prb_operator_new`] for the parameters.
 */
typedef enum PrbPsiKind {
  PRB_PSI_KIND_IDENTITY = 0,
  /**
   * p0 + p1·x
   */
  PRB_PSI_KIND_AFFINE = 1,
  PRB_PSI_KIND_LOG = 2,
  /**
   * x^p0
   */
  PRB_PSI_KIND_POWER = 3,
  PRB_PSI_KIND_EXP = 4,
} PrbPsiKind;

/**
 * Result of every call.
 */
typedef enum PrbStatus {
  PRB_STATUS_OK = 0,
  PRB_STATUS_INVALID_ARGUMENT = 1,
  PRB_STATUS_DOMAIN = 2,
  PRB_STATUS_NOT_CONVERGED = 3,
  PRB_STATUS_OUTSIDE_ENVELOPE = 4,
  PRB_STATUS_GRID = 5,
  PRB_STATUS_PSI = 6,
  PRB_STATUS_SINGULAR_STEP = 7,
  PRB_STATUS_NULL_POINTER = 8,
  PRB_STATUS_PANIC = 9,
} PrbStatus;

/**
 * Opaque operator handle.
 */
typedef struct PrbOperator PrbOperator;

/**
 * Opaque Cauchy problem handle.
 */
typedef struct PrbProblem PrbProblem;

/**
 * Series truncation controls; zeroed fields take the library defaults.
 */
typedef struct PrbSeriesControl {
  double rel_tol;
  size_t max_terms;
} PrbSeriesControl;

/**
 * A summed series with its diagnostics.
 */
typedef struct PrbSeriesResult {
  double value;
  size_t terms;
  bool converged;
} PrbSeriesResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a
 * successful one. Valid until the next call on the same thread.
 */
const char *prb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *prb_version(void);

/**
 * ln Γ(x) for x > 0.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PrbStatus prb_log_gamma(double x, double *out);

/**
 * B(x, y) for x, y > 0.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PrbStatus prb_beta(double x, double y, double *out);

/**
 * Rising factorial (γ)_k.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PrbStatus prb_pochhammer(double gamma, uint32_t k, double *out);

/**
 * E^γ_{ρ,α}(z). `ctl` may be NULL. A sum that hits the term cap is still
 * written to `out` and the call returns `PRB_STATUS_NOT_CONVERGED`.
 *
 * # Safety
 * `ctl` is NULL or valid for reads; `out` must be valid for writes.
 */
enum PrbStatus prb_ml3(double rho,
                       double alpha,
                       double gamma,
                       double z,
                       const struct PrbSeriesControl *ctl,
                       struct PrbSeriesResult *out);

/**
 * Creates a left-sided operator with base point `a` on the ψ domain
 * `[a, b]`. `p0` and `p1` parametrise affine (offset, slope) and power
 * (exponent) maps and are ignored otherwise.
 *
 * # Safety
 * `out` must be valid for writes. The handle is released with
 * [`prb_operator_free`].
 */
enum PrbStatus prb_operator_new(double rho,
                                double alpha,
                                double gamma,
                                double omega,
                                enum PrbPsiKind psi,
                                double p0,
                                double p1,
                                double a,
                                double b,
                                struct PrbOperator **out);

/**
 * Releases an operator. NULL is ignored.
 *
 * # Safety
 * `op` is NULL or a handle from [`prb_operator_new`] not yet freed.
 */
void prb_operator_free(struct PrbOperator *op);

/**
 * Closed form of the operator on (ψ(t) − ψ(a))^{δ−1} at `x`.
 *
 * # Safety
 * `op` is a live handle; `out` must be valid for writes.
 */
enum PrbStatus prb_operator_power(const struct PrbOperator *op,
                                  double delta,
                                  double x,
                                  double *out);

/**
 * Right-sided counterpart on (ψ(b) − ψ(t))^{δ−1}, with `b` the right end of
 * the ψ domain.
 *
 * # Safety
 * `op` is a live handle; `out` must be valid for writes.
 */
enum PrbStatus prb_operator_power_right(const struct PrbOperator *op,
                                        double delta,
                                        double x,
                                        double *out);

/**
 * Applies the operator to samples `f[i] = f(nodes[i])` (increasing nodes,
 * the first at `a`) and evaluates the result at each of `xs`.
 *
 * # Safety
 * `op` is a live handle; `nodes` and `f` hold `n` values; `xs` and `out`
 * hold `m` values.
 */
enum PrbStatus prb_operator_apply(const struct PrbOperator *op,
                                  const double *nodes,
                                  const double *f,
                                  size_t n,
                                  const double *xs,
                                  size_t m,
                                  double *out);

/**
 * Operator-norm bound on `[a, b_end]`.
 *
 * # Safety
 * `op` is a live handle; `out` must be valid for writes.
 */
enum PrbStatus prb_operator_bound(const struct PrbOperator *op, double b_end, double *out);

/**
 * Parses a Cauchy problem from NUL-terminated UTF-8 JSON.
 *
 * # Safety
 * `json` is a valid C string; `out` must be valid for writes. The handle is
 * released with [`prb_problem_free`].
 */
enum PrbStatus prb_problem_from_json(const char *json, struct PrbProblem **out);

/**
 * Releases a problem. NULL is ignored.
 *
 * # Safety
 * `p` is NULL or a handle from [`prb_problem_from_json`] not yet freed.
 */
void prb_problem_free(struct PrbProblem *p);

/**
 * Series solution at each of `xs`. Values are written even when some
 * point does not converge; the call then returns
 * `PRB_STATUS_NOT_CONVERGED`.
 *
 * # Safety
 * `p` is a live handle; `xs` and `out` hold `m` values.
 */
enum PrbStatus prb_problem_series(const struct PrbProblem *p,
                                  const double *xs,
                                  size_t m,
                                  double *out);

/**
 * Volterra-equation solution on `n` nodes uniform in ψ over the problem
 * interval; writes the nodes to `x_out` and the solution to `u_out`.
 *
 * # Safety
 * `p` is a live handle; `x_out` and `u_out` hold `n` values.
 */
enum PrbStatus prb_problem_volterra(const struct PrbProblem *p,
                                    size_t n,
                                    double *x_out,
                                    double *u_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRABHAKAR_H */
