#ifndef THERMAL_AREALAW_H
#define THERMAL_AREALAW_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum TaStatus {
  TA_STATUS_OK = 0,
  TA_STATUS_NULL_POINTER = 1,
  TA_STATUS_INVALID_PARAMETER = 2,
  TA_STATUS_DIMENSION_GUARD = 3,
  TA_STATUS_EIGEN = 4,
  TA_STATUS_QUADRATURE = 5,
  TA_STATUS_CONFIG = 6,
  TA_STATUS_IO = 7,
  TA_STATUS_PANIC = 8,
} TaStatus;

/**
 * Opaque handle to a diagonalized Hamiltonian.
 */
typedef struct TaPrepared TaPrepared;

/**
 * Parameters of one chain evaluation. Zero `width` and `n_cap` mean unset,
 * as does a non-positive `gamma`.
 */
typedef struct TaChainParams {
  size_t dim;
  size_t side;
  size_t width;
  size_t n_max;
  size_t n_cap;
  double j;
  double u;
  double mu;
  double gamma;
  double quad_tol;
  size_t dim_guard;
  double sector_cutoff;
  bool pinsker;
} TaChainParams;

/**
 * Every value of the bound chain at one temperature.
 */
typedef struct TaChainResult {
  double beta;
  double gamma;
  size_t boundary_bonds;
  double exact_mi;
  double mean_particles;
  double translation_deviation;
  double lemma1_value;
  double prop1_value;
  double prop2_value;
  double theorem_value;
  double slack_lemma1;
  double slack_prop1;
  double slack_theorem;
  double g;
  double f_value;
  double eps1;
  double eps2;
  double main_constant;
  /**
   * Number of chain links that failed their check.
   */
  size_t violations;
} TaChainResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *ta_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ta_version(void);

/**
 * Fills `out` with the library defaults for the given model.
 *
 * # Safety
 * `out` must be null or point to writable memory for a `TaChainParams`.
 */
enum TaStatus ta_chain_params_init(size_t dim,
                                   size_t side,
                                   size_t n_max,
                                   double j,
                                   double u,
                                   double mu,
                                   struct TaChainParams *out);

/**
 * Closed-form constant `c(J, U, μ)` of the area law in dimension `dim`.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum TaStatus ta_main_constant(double j, double u, double mu, size_t dim, double *out);

/**
 * Area-law bound `c · max{1, β} · L^{d-1}`.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum TaStatus ta_theorem_bound(double beta,
                               size_t side,
                               size_t dim,
                               double j,
                               double u,
                               double mu,
                               double *out);

/**
 * Diagonalizes and evaluates the chain at a single temperature.
 *
 * # Safety
 * `params` must be null or point to a valid `TaChainParams`; `out` must be
 * null or point to writable memory for a `TaChainResult`.
 */
enum TaStatus ta_verify_chain(const struct TaChainParams *params,
                              double beta,
                              struct TaChainResult *out);

/**
 * Diagonalizes once for all of `betas` and stores the handle in `out`.
 *
 * # Safety
 * `params` must point to a valid `TaChainParams`, `betas` to `n_betas`
 * readable doubles, and `out` to a writable handle pointer. The handle must
 * be released with [`ta_prepared_free`].
 */
enum TaStatus ta_prepared_new(const struct TaChainParams *params,
                              const double *betas,
                              size_t n_betas,
                              struct TaPrepared **out);

/**
 * Evaluates the chain of a prepared system at `beta`.
 *
 * # Safety
 * `prepared` must be null or a live handle from [`ta_prepared_new`]; `out`
 * must be null or point to writable memory for a `TaChainResult`.
 */
enum TaStatus ta_prepared_evaluate(const struct TaPrepared *prepared,
                                   double beta,
                                   struct TaChainResult *out);

/**
 * Releases a handle from [`ta_prepared_new`]. Null is ignored.
 *
 * # Safety
 * `prepared` must be null or a live handle that is not used afterwards.
 */
void ta_prepared_free(struct TaPrepared *prepared);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THERMAL_AREALAW_H */
