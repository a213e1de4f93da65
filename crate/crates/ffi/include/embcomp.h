/* C interface to embcomp: compound-embedding composition and scoring. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every function in this library.
typedef enum EcStatus {
  // Success.
  EC_STATUS_OK = 0,
  // A required pointer argument was NULL.
  EC_STATUS_NULL_POINTER = 1,
  // An argument violated the documented domain (shape, range, emptiness).
  EC_STATUS_INVALID_ARGUMENT = 2,
  // A numeric procedure failed (singular system, divergence).
  EC_STATUS_NUMERICAL_ERROR = 3,
  // Unexpected internal failure; see `ec_last_error_message`.
  EC_STATUS_INTERNAL_ERROR = 4,
} EcStatus;

// Opaque fitted ridge model.
typedef struct EcRidgeModel EcRidgeModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message for the calling thread, NUL-terminated. Owned by the
// library; valid until the next failing call on this thread.
const char *ec_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ec_version(void);

// `out[i] = u[i] + v[i]`
// # Safety
// `u`, `v` must point to `dim` readable doubles and `out` to `dim`
// writable doubles.
enum EcStatus ec_compose_simple_add(const double *u, const double *v, size_t dim, double *out);

// `out[i] = u[i] * v[i]`
// # Safety
// `u`, `v` must point to `dim` readable doubles and `out` to `dim`
// writable doubles.
enum EcStatus ec_compose_multiplicative(const double *u, const double *v, size_t dim, double *out);

// `out = alpha*u + beta*v`
// # Safety
// `u`, `v` must point to `dim` readable doubles and `out` to `dim`
// writable doubles.
enum EcStatus ec_compose_weighted_add(const double *u,
                                      const double *v,
                                      size_t dim,
                                      double alpha,
                                      double beta,
                                      double *out);

// `out = (u.u) v + (lambda - 1)(u.v) u`
// # Safety
// `u`, `v` must point to `dim` readable doubles and `out` to `dim`
// writable doubles.
enum EcStatus ec_compose_dilation(const double *u,
                                  const double *v,
                                  size_t dim,
                                  double lambda,
                                  double *out);

// Cosine similarity; 0 when either vector has zero norm.
// # Safety
// `a`, `b` must point to `dim` readable doubles; `out` must be writable.
enum EcStatus ec_cosine_similarity(const double *a, const double *b, size_t dim, double *out);

// Fit ridge regression on `n` training triples. `us`, `vs`, `ws` are
// row-major `n x dim` arrays. On success `*out_model` owns the handle;
// release it with `ec_ridge_model_free`.
// # Safety
// The three data pointers must each cover `n * dim` readable doubles and
// `out_model` must be a writable pointer slot.
enum EcStatus ec_ridge_fit(const double *us,
                           const double *vs,
                           const double *ws,
                           size_t n,
                           size_t dim,
                           double regularization,
                           struct EcRidgeModel **out_model);

// Embedding dimension the model was trained for; 0 for a NULL handle.
// # Safety
// `model` must be NULL or a live handle from `ec_ridge_fit`.
size_t ec_ridge_model_dim(const struct EcRidgeModel *model);

// Predict a compound embedding from two constituent embeddings.
// # Safety
// `model` must be a live handle; `u`, `v` must point to `dim` readable
// doubles where `dim = ec_ridge_model_dim(model)`; `out` must be writable
// for `dim` doubles.
enum EcStatus ec_ridge_predict(const struct EcRidgeModel *model,
                               const double *u,
                               const double *v,
                               double *out);

// Release a model handle. NULL is tolerated.
// # Safety
// `model` must be NULL or a handle obtained from `ec_ridge_fit`, and must
// not be used afterwards.
void ec_ridge_model_free(struct EcRidgeModel *model);

// Jensen-Shannon divergence (base-2, in [0,1]) between Gaussian KDEs of two
// similarity sample sets evaluated on a shared grid. `bandwidth <= 0`
// selects the larger of the two Scott's-rule bandwidths so the result stays
// symmetric.
// # Safety
// `p` and `q` must point to `np` / `nq` readable doubles; `out` writable.
enum EcStatus ec_js_divergence_from_samples(const double *p,
                                            size_t np,
                                            const double *q,
                                            size_t nq,
                                            double bandwidth,
                                            double *out);

// Deterministic unit-norm synthetic embedding for `text` (NUL-terminated
// UTF-8), keyed by `seed`. Useful for exercising bindings without any
// provider access.
// # Safety
// `text` must be a NUL-terminated string; `out` must cover `dim` doubles.
enum EcStatus ec_synthetic_embed(const char *text, size_t dim, uint64_t seed, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
