#ifndef APSDET_H
#define APSDET_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum ApsStatus {
  APS_STATUS_OK = 0,
  APS_STATUS_NULL_POINTER = 1,
  APS_STATUS_INVALID_ARGUMENT = 2,
  APS_STATUS_INVALID_MODEL = 3,
  APS_STATUS_NOT_INVERTIBLE = 4,
  APS_STATUS_NUMERIC = 5,
  APS_STATUS_PANIC = 6,
} ApsStatus;

/**
 * Unitary involution on `ker B` anticommuting with `G`.
 */
typedef struct ApsInvolution ApsInvolution;

/**
 * Boundary model: `B`, `G` and the derived mode basis.
 */
typedef struct ApsModel ApsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library from the same thread.
 */
const char *aps_last_error(void);

/**
 * Static description of a status code.
 */
const char *aps_status_message(enum ApsStatus status);

/**
 * Canonical model with `dim ker B = 2l` and the eigenvalue pairs `±eigs[i]`.
 *
 * # Safety
 * `eigs` must point to `n` doubles (or be null when `n == 0`); `out` must be
 * writable.
 */
enum ApsStatus aps_model_canonical(size_t l, const double *eigs, size_t n, struct ApsModel **out);

/**
 * Model from explicit `n × n` matrices `B` (Hermitian) and `G`.
 *
 * # Safety
 * `b` and `g` must each point to `2 n²` doubles; `out` must be writable.
 */
enum ApsStatus aps_model_from_matrices(size_t n,
                                       const double *b,
                                       const double *g,
                                       struct ApsModel **out);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void aps_model_free(struct ApsModel *model);

/**
 * Dimension of the boundary space.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum ApsStatus aps_model_dim(const struct ApsModel *model, size_t *out);

/**
 * Half the dimension of `ker B`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum ApsStatus aps_model_half_kernel_dim(const struct ApsModel *model, size_t *out);

/**
 * `τ`, or the empty involution when `ker B = 0`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum ApsStatus aps_involution_tau(const struct ApsModel *model, struct ApsInvolution **out);

/**
 * `σ_θ` with one angle in `(0, π/2)` per kernel block.
 *
 * # Safety
 * `angles` must point to `n` doubles; `out` must be writable.
 */
enum ApsStatus aps_involution_sigma_theta(const struct ApsModel *model,
                                          const double *angles,
                                          size_t n,
                                          struct ApsInvolution **out);

/**
 * Involution from an explicit `2l × 2l` matrix in kernel coordinates.
 *
 * # Safety
 * `entries` must point to `8 l²` doubles; `out` must be writable.
 */
enum ApsStatus aps_involution_from_matrix(size_t l,
                                          const double *entries,
                                          struct ApsInvolution **out);

/**
 * Random involution, reproducible from `seed`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ApsStatus aps_involution_random(size_t l, uint64_t seed, struct ApsInvolution **out);

/**
 * # Safety
 * `inv` must come from this library and not be used afterwards.
 */
void aps_involution_free(struct ApsInvolution *inv);

/**
 * `log Det` on the cylinder `[0, r]`. A null end means Dirichlet.
 *
 * # Safety
 * Handles must be live or null where allowed; `out` must be writable.
 */
enum ApsStatus aps_cylinder_logdet(const struct ApsModel *model,
                                   double r,
                                   const struct ApsInvolution *left,
                                   const struct ApsInvolution *right,
                                   double *out);

/**
 * `Det(C, σ₁) / Det(C, σ₂)` on the cylinder `[0, r]`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum ApsStatus aps_cylinder_det_ratio(const struct ApsModel *model,
                                      double r,
                                      const struct ApsInvolution *left,
                                      const struct ApsInvolution *sigma1,
                                      const struct ApsInvolution *sigma2,
                                      double *out);

/**
 * `det(C − σ₁) / det(C − σ₂)` on `ker B`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum ApsStatus aps_kernel_det_ratio(const struct ApsInvolution *c0,
                                    const struct ApsInvolution *sigma1,
                                    const struct ApsInvolution *sigma2,
                                    double *out);

/**
 * Residual of the gluing formula for a bulk of length `length` (far end
 * `far`, null for Dirichlet) glued to a cylinder of length `r` with
 * `APS(σ)` at its end.
 *
 * # Safety
 * Handles must be live or null where allowed; `out` must be writable.
 */
enum ApsStatus aps_gluing_residual(const struct ApsModel *model,
                                   double length,
                                   const struct ApsInvolution *far,
                                   double r,
                                   const struct ApsInvolution *sigma,
                                   double *out);

/**
 * `det R_{r,σ₁} / det R_{r,σ₂}` as a Fredholm determinant on `ker B`.
 *
 * # Safety
 * Handles must be live or null where allowed; `out` must be writable.
 */
enum ApsStatus aps_fredholm_ratio(const struct ApsModel *model,
                                  double length,
                                  const struct ApsInvolution *far,
                                  double r,
                                  const struct ApsInvolution *sigma1,
                                  const struct ApsInvolution *sigma2,
                                  double *out);

/**
 * `ζ(0, α)` and `∂_s ζ(0, α)`.
 *
 * # Safety
 * `zeta0` and `dzeta0` must be writable.
 */
enum ApsStatus aps_hurwitz_at_zero(double alpha, double *zeta0, double *dzeta0);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APSDET_H */
