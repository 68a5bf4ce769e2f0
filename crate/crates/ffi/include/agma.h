#ifndef AGMA_H
#define AGMA_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum AgmaStatus {
  AGMA_STATUS_OK = 0,
  AGMA_STATUS_NULL_POINTER = 1,
  AGMA_STATUS_INVALID_ARGUMENT = 2,
  AGMA_STATUS_DIMENSION_MISMATCH = 3,
  AGMA_STATUS_STEPSIZE_OUT_OF_RANGE = 4,
  AGMA_STATUS_DIVERGENCE = 5,
  AGMA_STATUS_CONSTANTS_UNAVAILABLE = 6,
  AGMA_STATUS_NOT_CONVERGED = 7,
  AGMA_STATUS_IO = 8,
  AGMA_STATUS_INTERNAL = 99,
} AgmaStatus;

typedef enum AgmaLoss {
  AGMA_LOSS_LEAST_SQUARES = 0,
  AGMA_LOSS_REGULARIZED_LOGISTIC = 1,
  AGMA_LOSS_LOG_LOSS = 2,
} AgmaLoss;

typedef enum AgmaGain {
  AGMA_GAIN_RAYLEIGH = 0,
  AGMA_GAIN_UNIFORM = 1,
  AGMA_GAIN_CONSTANT = 2,
} AgmaGain;

typedef enum AgmaAlgorithm {
  AGMA_ALGORITHM_AGMA = 0,
  AGMA_ALGORITHM_GBMA = 1,
  AGMA_ALGORITHM_FDM_GD = 2,
  AGMA_ALGORITHM_FDM_AGD = 3,
  AGMA_ALGORITHM_CENTRAL_NESTEROV = 4,
} AgmaAlgorithm;

typedef struct AgmaChannel AgmaChannel;

typedef struct AgmaProblem AgmaProblem;

typedef struct AgmaTrace AgmaTrace;

// Options for [`agma_run`]. Start from [`agma_run_options_default`].
typedef struct AgmaRunOptions {
  enum AgmaAlgorithm algorithm;
  // Absolute stepsize; a non-positive value selects `1 / (mu_h L)`.
  double beta;
  // NaN selects the default.
  double alpha0;
  size_t max_iters;
  // Momentum cutoff k0; 0 disables the restart.
  size_t restart_k0;
  uint64_t seed;
  size_t replications;
  bool allow_out_of_range;
} AgmaRunOptions;

// Constants for the closed-form bounds. `mu = 0` selects the convex regime.
typedef struct AgmaBoundParams {
  double lipschitz;
  double mu;
  double mu_h;
  double sigma_h_sq;
  double sigma_w_sq;
  double gradient_bound;
  size_t dimension;
  size_t nodes;
  double power;
  double beta;
  double alpha0;
  double f0_gap;
  double dist0_sq;
  double epsilon;
} AgmaBoundParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer is
// valid until the next `agma_*` call on the same thread.
const char *agma_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *agma_version(void);

// Synthetic least-squares instance with exact `L = 1`, `mu = 1/cond`
// (`mu = 0` when `rank < d`).
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum AgmaStatus agma_problem_synthetic_quadratic(size_t dimension,
                                                 double condition_number,
                                                 size_t rank,
                                                 size_t nodes,
                                                 uint64_t seed,
                                                 struct AgmaProblem **out);

// Builds a problem from a row-major `rows x cols` feature matrix and labels,
// dealt round-robin to `nodes` nodes after a seeded shuffle.
//
// # Safety
// `features` must point to `rows * cols` doubles, `labels` to `rows`
// doubles, and `out` to writable storage for one handle.
enum AgmaStatus agma_problem_from_arrays(const double *features,
                                         const double *labels,
                                         size_t rows,
                                         size_t cols,
                                         enum AgmaLoss loss,
                                         double lambda,
                                         size_t nodes,
                                         uint64_t seed,
                                         struct AgmaProblem **out);

// Loads a CSV file. `binary` selects ±1 classification labels (regularized
// logistic loss); otherwise labels are centered regression targets.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` writable storage
// for one handle.
enum AgmaStatus agma_problem_from_csv(const char *path,
                                      size_t label_column,
                                      bool binary,
                                      size_t nodes,
                                      uint64_t seed,
                                      struct AgmaProblem **out);

// # Safety
// `problem` must be NULL or a handle from an `agma_problem_*` constructor
// that has not been freed.
void agma_problem_free(struct AgmaProblem *problem);

// # Safety
// `problem` must be a live handle; `dimension` and `nodes` writable.
enum AgmaStatus agma_problem_shape(const struct AgmaProblem *problem,
                                   size_t *dimension,
                                   size_t *nodes);

// Writes L, mu, G and F*. Fails with `ConstantsUnavailable` for log-loss.
//
// # Safety
// `problem` must be a live handle; the outputs must be writable.
enum AgmaStatus agma_problem_constants(const struct AgmaProblem *problem,
                                       double *lipschitz,
                                       double *mu,
                                       double *gradient_bound,
                                       double *f_star);

// Global objective F(theta).
//
// # Safety
// `theta` must point to `len` doubles and `out` must be writable.
enum AgmaStatus agma_problem_objective(const struct AgmaProblem *problem,
                                       const double *theta,
                                       size_t len,
                                       double *out);

// Global gradient of F at theta, written to `grad` (both of length `len`).
//
// # Safety
// `theta` and `grad` must each point to `len` doubles.
enum AgmaStatus agma_problem_gradient(const struct AgmaProblem *problem,
                                      const double *theta,
                                      size_t len,
                                      double *grad);

// Channel from gain moments. A NaN `sigma_h_sq` selects the family's own
// variance (Rayleigh, constant); uniform gains require it.
//
// # Safety
// `out` must be writable storage for one handle.
enum AgmaStatus agma_channel_new(enum AgmaGain gain,
                                 double mu_h,
                                 double sigma_h_sq,
                                 double sigma_w_sq,
                                 double power,
                                 struct AgmaChannel **out);

// # Safety
// `channel` must be NULL or a live handle from [`agma_channel_new`].
void agma_channel_free(struct AgmaChannel *channel);

struct AgmaRunOptions agma_run_options_default(void);

// Monte Carlo run: per-iteration mean excess risk and 95% half-width over
// `opts.replications` seeded replications.
//
// # Safety
// `problem`, `channel` and `opts` must be live; `out` writable storage for
// one handle.
enum AgmaStatus agma_run(const struct AgmaProblem *problem,
                         const struct AgmaChannel *channel,
                         const struct AgmaRunOptions *opts,
                         struct AgmaTrace **out);

// # Safety
// `trace` must be NULL or a live handle from [`agma_run`].
void agma_trace_free(struct AgmaTrace *trace);

// Number of recorded iterations (`max_iters + 1`).
//
// # Safety
// `trace` must be a live handle and `len` writable.
enum AgmaStatus agma_trace_len(const struct AgmaTrace *trace, size_t *len);

// Copies the mean excess risk and CI half-widths. Either output may be
// NULL; `len` must equal [`agma_trace_len`].
//
// # Safety
// Non-NULL outputs must point to `len` writable doubles.
enum AgmaStatus agma_trace_copy(const struct AgmaTrace *trace,
                                double *mean,
                                double *ci_halfwidth,
                                size_t len);

// Whether the run's stepsize lies outside the convergent range.
//
// # Safety
// `trace` must be a live handle and `out` writable.
enum AgmaStatus agma_trace_out_of_range(const struct AgmaTrace *trace, bool *out);

// Excess-risk bound at iteration k: the strongly convex bound when
// `mu > 0`, otherwise the convex bound (valid for `k <= k0`).
//
// # Safety
// `params` must be live and `out` writable.
enum AgmaStatus agma_bound(const struct AgmaBoundParams *params, size_t k, double *out);

// Distortion and noise terms (T2, T3) of the bound for its regime.
//
// # Safety
// `params` must be live; `t2` and `t3` writable.
enum AgmaStatus agma_bound_terms(const struct AgmaBoundParams *params, double *t2, double *t3);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AGMA_H */
