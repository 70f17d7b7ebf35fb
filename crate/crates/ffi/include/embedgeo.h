#ifndef EMBEDGEO_H
#define EMBEDGEO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum {
  EGEO_STATUS_OK = 0,
  EGEO_STATUS_NULL_POINTER = 1,
  EGEO_STATUS_INVALID_ARGUMENT = 2,
  EGEO_STATUS_IO = 3,
  EGEO_STATUS_DATA = 4,
  EGEO_STATUS_GEOMETRY = 5,
  EGEO_STATUS_INTRINSIC_DIM = 6,
  EGEO_STATUS_TRANSPORT = 7,
  EGEO_STATUS_LIPSCHITZ = 8,
  EGEO_STATUS_BOUND = 9,
  EGEO_STATUS_PANIC = 10,
} EgeoStatus;

typedef enum {
  // Pick by file extension (`.csv`/`.txt` are CSV, anything else EMB1).
  EGEO_FORMAT_AUTO = 0,
  EGEO_FORMAT_EMB1 = 1,
  EGEO_FORMAT_CSV = 2,
} EgeoFormat;

typedef enum {
  EGEO_ESTIMATOR_MLE = 0,
  EGEO_ESTIMATOR_MOM = 1,
} EgeoEstimator;

typedef enum {
  EGEO_METRIC_EUCLIDEAN = 0,
  EGEO_METRIC_L1 = 1,
} EgeoMetric;

// Opaque embedding set.
typedef struct EgeoEmbeddings EgeoEmbeddings;

// Opaque weight stack.
typedef struct EgeoWeights EgeoWeights;

typedef struct {
  double epsilon;
  size_t max_iter;
  double tol;
  EgeoMetric metric;
} EgeoSinkhornConfig;

typedef struct {
  double cost;
  size_t iterations;
  bool converged;
  double marginal_violation;
} EgeoTransportResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *egeo_version(void);

// Module error name of the last failed call on this thread (empty after a success).
// The pointer stays valid until the next `egeo_*` call on the same thread.
const char *egeo_last_error_name(void);

// Human-readable message of the last failed call on this thread.
const char *egeo_last_error_message(void);

// Reads an embedding file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
EgeoStatus egeo_embeddings_read(const char *path, EgeoFormat format, EgeoEmbeddings **out);

// Decodes EMB1 or CSV bytes held in memory. `Auto` means EMB1.
//
// # Safety
// `bytes` must point to `len` readable bytes; `out` must be writable.
EgeoStatus egeo_embeddings_decode(const uint8_t *bytes,
                                  size_t len,
                                  EgeoFormat format,
                                  EgeoEmbeddings **out);

// Copies a row-major `n x dim` array into a new embedding set.
//
// # Safety
// `data` must point to `n * dim` readable doubles; `out` must be writable.
EgeoStatus egeo_embeddings_from_rows(const double *data,
                                     size_t n,
                                     size_t dim,
                                     EgeoEmbeddings **out);

// Writes an embedding set as EMB1 (`f32` or `f64` payload) or CSV.
//
// # Safety
// `set` must be a live handle and `path` a NUL-terminated string.
EgeoStatus egeo_embeddings_write(const EgeoEmbeddings *set,
                                 const char *path,
                                 EgeoFormat format,
                                 bool single_precision);

// Releases a handle. Null is ignored.
//
// # Safety
// `set` must come from this library and not be used afterwards.
void egeo_embeddings_free(EgeoEmbeddings *set);

// # Safety
// `set` must be a live handle; the outputs must be writable (either may be null).
EgeoStatus egeo_embeddings_shape(const EgeoEmbeddings *set, size_t *n, size_t *dim);

// Intrinsic-dimension estimate from `k` nearest neighbors.
//
// # Safety
// `set` must be a live handle; `out` must be writable.
EgeoStatus egeo_intrinsic_dim(const EgeoEmbeddings *set,
                              size_t k,
                              EgeoEstimator estimator,
                              double *out);

// ℓ1 diameter. `sampled_pairs == 0` computes the exact maximum over all pairs.
//
// # Safety
// `set` must be a live handle; `out` must be writable.
EgeoStatus egeo_l1_diameter(const EgeoEmbeddings *set,
                            size_t sampled_pairs,
                            uint64_t seed,
                            double *out);

// Solver defaults (ε = 0.01, 200 sweeps, tolerance 1e-6, Euclidean cost).
EgeoSinkhornConfig egeo_sinkhorn_default_config(void);

// Entropic W1 between two sets with uniform weights. A null `config` uses the defaults.
//
// # Safety
// `a` and `b` must be live handles; `config` may be null; `out` must be writable.
EgeoStatus egeo_sinkhorn_w1(const EgeoEmbeddings *a,
                            const EgeoEmbeddings *b,
                            const EgeoSinkhornConfig *config,
                            EgeoTransportResult *out);

// Exact W1 for equal-size sets via optimal assignment.
//
// # Safety
// `a` and `b` must be live handles; `out` must be writable.
EgeoStatus egeo_exact_w1(const EgeoEmbeddings *a,
                         const EgeoEmbeddings *b,
                         EgeoMetric ground,
                         double *out);

// Largest singular value of a row-major `rows x cols` matrix by power iteration.
// Non-positive `tol` or zero `max_iter` select the defaults.
//
// # Safety
// `data` must point to `rows * cols` readable doubles; `out` must be writable.
EgeoStatus egeo_spectral_norm(const double *data,
                              size_t rows,
                              size_t cols,
                              double tol,
                              size_t max_iter,
                              double *out);

// Reads a WTS1 weight stack.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
EgeoStatus egeo_weights_read(const char *path, EgeoWeights **out);

// Decodes WTS1 bytes held in memory.
//
// # Safety
// `bytes` must point to `len` readable bytes; `out` must be writable.
EgeoStatus egeo_weights_decode(const uint8_t *bytes, size_t len, EgeoWeights **out);

// # Safety
// `weights` must come from this library and not be used afterwards.
void egeo_weights_free(EgeoWeights *weights);

// Number of linear layers in the stack.
//
// # Safety
// `weights` must be a live handle; `out` must be writable.
EgeoStatus egeo_weights_len(const EgeoWeights *weights, size_t *out);

// Product of the spectral norms of layers `i..len`; `i == len` gives 1.
//
// # Safety
// `weights` must be a live handle; `out` must be writable.
EgeoStatus egeo_suffix_lipschitz(const EgeoWeights *weights, size_t i, double *out);

// Evaluates the bound from a JSON configuration. Writes the minimum gap and its
// layer; when `report_json` is non-null it receives the full per-layer report,
// to be released with [`egeo_string_free`].
//
// # Safety
// `config_json` must be a NUL-terminated string; outputs must be writable or null.
EgeoStatus egeo_evaluate_bound(const char *config_json,
                               double *min_gap,
                               size_t *argmin_k,
                               char **report_json);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void egeo_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMBEDGEO_H */
