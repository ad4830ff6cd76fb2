#ifndef GNNSTAB_H
#define GNNSTAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GnnstabDistanceMode {
  /**
   * No relabeling.
   */
  GNNSTAB_DISTANCE_MODE_IDENTITY = 0,
  /**
   * Minimum over all relabelings; `N ≤ 8`.
   */
  GNNSTAB_DISTANCE_MODE_BRUTE_FORCE = 1,
} GnnstabDistanceMode;

typedef enum GnnstabGsoKind {
  GNNSTAB_GSO_KIND_ADJACENCY = 0,
  GNNSTAB_GSO_KIND_LAPLACIAN = 1,
  GNNSTAB_GSO_KIND_MARKOV = 2,
} GnnstabGsoKind;

typedef enum GnnstabStatus {
  GNNSTAB_STATUS_OK = 0,
  GNNSTAB_STATUS_NULL_POINTER = 1,
  GNNSTAB_STATUS_INVALID_ARGUMENT = 2,
  GNNSTAB_STATUS_SHAPE = 3,
  GNNSTAB_STATUS_NOT_SYMMETRIC = 4,
  GNNSTAB_STATUS_SINGULAR = 5,
  GNNSTAB_STATUS_TOO_LARGE = 6,
  GNNSTAB_STATUS_IO = 7,
  GNNSTAB_STATUS_PARSE = 8,
  GNNSTAB_STATUS_PANIC = 9,
} GnnstabStatus;

/**
 * Opaque shift operator.
 */
typedef struct GnnstabGso GnnstabGso;

/**
 * Opaque trained model.
 */
typedef struct GnnstabModel GnnstabModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, as a static NUL-terminated string.
 */
const char *gnnstab_version(void);

/**
 * Message of the last failure on this thread; empty if none. Valid until the
 * next failing call on the same thread.
 */
const char *gnnstab_last_error(void);

/**
 * Builds a shift operator from a row-major `n × n` matrix. The matrix is
 * symmetrized by averaging with its transpose.
 *
 * # Safety
 * `data` must point to `n * n` doubles and `out` to writable storage.
 */
enum GnnstabStatus gnnstab_gso_new(const double *data,
                                   size_t n,
                                   enum GnnstabGsoKind kind,
                                   struct GnnstabGso **out);

/**
 * Releases a shift operator; null is ignored.
 *
 * # Safety
 * `gso` must come from this library and not be used afterwards.
 */
void gnnstab_gso_free(struct GnnstabGso *gso);

/**
 * # Safety
 * `gso` must be a live handle and `out` writable.
 */
enum GnnstabStatus gnnstab_gso_node_count(const struct GnnstabGso *gso, size_t *out);

/**
 * New handle holding `(1 + epsilon)·S`.
 *
 * # Safety
 * `gso` must be a live handle and `out` writable.
 */
enum GnnstabStatus gnnstab_gso_dilate(const struct GnnstabGso *gso,
                                      double epsilon,
                                      struct GnnstabGso **out);

/**
 * Eigenvalues in ascending order; `len` must equal the node count.
 *
 * # Safety
 * `gso` must be a live handle and `out` must hold `len` doubles.
 */
enum GnnstabStatus gnnstab_gso_eigenvalues(const struct GnnstabGso *gso, double *out, size_t len);

/**
 * `y = Σ_k h_k S^k x` for a row-major `N × features` signal.
 *
 * # Safety
 * `taps` must hold `k` doubles; `x` and `out` must hold `N * features`.
 */
enum GnnstabStatus gnnstab_graph_convolution(const struct GnnstabGso *gso,
                                             const double *taps_ptr,
                                             size_t k,
                                             const double *x,
                                             size_t features,
                                             double *out);

/**
 * `h(λ)` at each of `len` points.
 *
 * # Safety
 * `taps` must hold `k` doubles; `lambdas` and `out` must hold `len`.
 */
enum GnnstabStatus gnnstab_frequency_response(const double *taps_ptr,
                                              size_t k,
                                              const double *lambdas,
                                              size_t len,
                                              double *out);

/**
 * Grid estimate of `max |λh′(λ)|` and `max |h(λ)|` over `[a, b]`.
 *
 * # Safety
 * `taps` must hold `k` doubles; both outputs must be writable.
 */
enum GnnstabStatus gnnstab_integral_lipschitz(const double *taps_ptr,
                                              size_t k,
                                              double a,
                                              double b,
                                              size_t grid_size,
                                              double *constant,
                                              double *max_gain);

/**
 * Size `‖E‖` of the relative error relating `s` and `s_hat`.
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum GnnstabStatus gnnstab_relative_distance(const struct GnnstabGso *s,
                                             const struct GnnstabGso *s_hat,
                                             enum GnnstabDistanceMode distance_mode,
                                             double *out);

/**
 * `‖H(S) − H(Ŝ)‖` in the spectral norm.
 *
 * # Safety
 * Both handles must be live, `taps` must hold `k` doubles and `out` be writable.
 */
enum GnnstabStatus gnnstab_filter_distance(const struct GnnstabGso *s,
                                           const struct GnnstabGso *s_hat,
                                           const double *taps_ptr,
                                           size_t k,
                                           enum GnnstabDistanceMode distance_mode,
                                           double *out);

/**
 * `2C(1 + δ√N)ε`.
 */
double gnnstab_filter_stability_bound(double c, double delta, size_t n, double epsilon);

/**
 * `2C(1 + δ√N)Lε`.
 */
double gnnstab_gnn_stability_bound(double c, double delta, size_t n, double epsilon, size_t layers);

/**
 * Loads a JSON checkpoint written by `gnnstab train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum GnnstabStatus gnnstab_model_load(const char *path, struct GnnstabModel **out);

/**
 * Releases a model; null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void gnnstab_model_free(struct GnnstabModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum GnnstabStatus gnnstab_model_input_features(const struct GnnstabModel *model, size_t *out);

/**
 * Prediction at the model's readout node for a row-major `N × F` signal.
 *
 * # Safety
 * Handles must be live, `x` must hold `N * F` doubles and `out` be writable.
 */
enum GnnstabStatus gnnstab_model_predict(const struct GnnstabModel *model,
                                         const struct GnnstabGso *gso,
                                         const double *x,
                                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GNNSTAB_H */
