#ifndef MOREAU_H
#define MOREAU_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum MoreauStatus {
  MOREAU_STATUS_OK = 0,
  MOREAU_STATUS_NULL_POINTER = 1,
  MOREAU_STATUS_INVALID_ARGUMENT = 2,
  MOREAU_STATUS_DIMENSION_MISMATCH = 3,
  MOREAU_STATUS_INADMISSIBLE_GAMMA = 4,
  MOREAU_STATUS_UNKNOWN_FUNCTION = 5,
  MOREAU_STATUS_NOT_CONVERGED = 6,
  MOREAU_STATUS_UNSUPPORTED = 7,
  MOREAU_STATUS_NUMERIC_ERROR = 8,
  MOREAU_STATUS_PANIC = 9,
} MoreauStatus;

// Opaque handle to an immutable function. Safe to share between threads.
typedef struct MoreauFunction MoreauFunction;

// `f(x)` for `x` of length `dim`; return `+inf` outside the domain.
typedef double (*MoreauValueFn)(const double *x, size_t dim, void *user_data);

// Writes `grad f(x)` into `out` (length `dim`); a nonzero return marks `x`
// as a point without gradient.
typedef int32_t (*MoreauGradientFn)(const double *x, size_t dim, double *out, void *user_data);

// Sharp moduli of an envelope. Optional fields carry a `has_` flag.
typedef struct MoreauEnvModuli {
  double weak;
  double strong;
  bool has_strong;
  double smooth;
  double smooth_prox_image;
  bool has_smooth_prox_image;
} MoreauEnvModuli;

// Creates a zoo member, e.g. `("quadratic", {2.0}, 1)`.
//
// # Safety
// `name` must be a NUL-terminated string, `params` must hold `n_params`
// doubles (or be null when `n_params` is 0) and `out` must be writable.
enum MoreauStatus moreau_function_new(const char *name,
                                      const double *params,
                                      size_t n_params,
                                      struct MoreauFunction **out);

// Creates a zoo member from its label, e.g. `"indicator(0,1)"`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` must be writable.
enum MoreauStatus moreau_function_parse(const char *text, struct MoreauFunction **out);

// Creates a function from C callbacks. `gradient` may be null. When
// `differentiable` is true the gradient must exist everywhere and enables
// the gradient inner solver; otherwise only one-dimensional functions can
// be prox-evaluated.
//
// # Safety
// The callbacks must be callable from any thread with `user_data`, which
// must outlive the handle. `out` must be writable.
enum MoreauStatus moreau_function_from_callbacks(size_t dim,
                                                 double rho,
                                                 MoreauValueFn value,
                                                 MoreauGradientFn gradient,
                                                 bool differentiable,
                                                 void *user_data,
                                                 struct MoreauFunction **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `f` must come from one of the constructors and not be used afterwards.
void moreau_function_free(struct MoreauFunction *f);

// Dimension of the function, 0 for a null handle.
//
// # Safety
// `f` must be null or a live handle.
size_t moreau_function_dim(const struct MoreauFunction *f);

// Declared weak-convexity modulus, NaN for a null handle.
//
// # Safety
// `f` must be null or a live handle.
double moreau_function_rho(const struct MoreauFunction *f);

// `f(x)`; `+inf` outside the domain.
//
// # Safety
// `x` must hold `dim` doubles and `out` must be writable.
enum MoreauStatus moreau_evaluate(const struct MoreauFunction *f,
                                  const double *x,
                                  size_t dim,
                                  double *out);

// `Prox_{gamma f}(x)` into `out`.
//
// # Safety
// `x` and `out` must each hold `dim` doubles.
enum MoreauStatus moreau_prox(const struct MoreauFunction *f,
                              double gamma,
                              const double *x,
                              size_t dim,
                              double *out);

// Envelope value `f^gamma(x)`.
//
// # Safety
// `x` must hold `dim` doubles and `out` must be writable.
enum MoreauStatus moreau_env_value(const struct MoreauFunction *f,
                                   double gamma,
                                   const double *x,
                                   size_t dim,
                                   double *out);

// Envelope gradient `(x - Prox_{gamma f}(x)) / gamma` into `out`.
//
// # Safety
// `x` and `out` must each hold `dim` doubles.
enum MoreauStatus moreau_env_gradient(const struct MoreauFunction *f,
                                      double gamma,
                                      const double *x,
                                      size_t dim,
                                      double *out);

// Derivative of the envelope in `gamma`.
//
// # Safety
// `x` must hold `dim` doubles and `out` must be writable.
enum MoreauStatus moreau_env_dgamma(const struct MoreauFunction *f,
                                    double gamma,
                                    const double *x,
                                    size_t dim,
                                    double *out);

// Diagonal of the envelope Hessian into `out`. Needs a Hessian oracle.
//
// # Safety
// `x` and `out` must each hold `dim` doubles.
enum MoreauStatus moreau_env_hessian_diag(const struct MoreauFunction *f,
                                          double gamma,
                                          const double *x,
                                          size_t dim,
                                          double *out);

// `1 / (1 - gamma rho)`.
//
// # Safety
// `out` must be writable.
enum MoreauStatus moreau_prox_lipschitz_constant(double rho, double gamma, double *out);

// Envelope moduli; pass NaN for an unknown curvature bound.
//
// # Safety
// `out` must be writable.
enum MoreauStatus moreau_env_moduli(double rho,
                                    double gamma,
                                    double curvature_bound,
                                    struct MoreauEnvModuli *out);

// Proximal point iterations from `x0`. The last iterate goes to `out`;
// a run that hits `max_iter` still fills the outputs and returns
// `MOREAU_STATUS_NOT_CONVERGED`.
//
// # Safety
// `x0` and `out` must each hold `dim` doubles; `iterations` and
// `converged` must be null or writable.
enum MoreauStatus moreau_proximal_point(const struct MoreauFunction *f,
                                        double gamma,
                                        const double *x0,
                                        size_t dim,
                                        double tol,
                                        size_t max_iter,
                                        double *out,
                                        size_t *iterations,
                                        bool *converged);

// Grid estimate of the conjugate `f*(w)`; `+inf` when unbounded.
//
// # Safety
// `w` must hold `dim` doubles and `out` must be writable.
enum MoreauStatus moreau_conjugate_value(const struct MoreauFunction *f,
                                         const double *w,
                                         size_t dim,
                                         double *out);

// Seeded lower estimate of the nonconvexity criterion over the box
// `[lower, upper]`, which must lie inside the domain.
//
// # Safety
// `lower` and `upper` must each hold `dim` doubles and `out` must be writable.
enum MoreauStatus moreau_nc_estimate(const struct MoreauFunction *f,
                                     const double *lower,
                                     const double *upper,
                                     size_t dim,
                                     size_t budget,
                                     uint64_t seed,
                                     double *out);

// Message of the last failure on this thread; empty when none. Valid until
// the next failing call on the same thread.
const char *moreau_last_error_message(void);

// Static description of a status code.
const char *moreau_status_message(int32_t status);

#endif  /* MOREAU_H */
