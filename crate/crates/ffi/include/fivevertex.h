#ifndef FIVEVERTEX_H
#define FIVEVERTEX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Library errors keep the numeric codes used by the command-line tool.
 */
typedef enum FvStatus {
  FV_STATUS_OK = 0,
  FV_STATUS_DOMAIN = 2,
  FV_STATUS_SINGULAR = 3,
  FV_STATUS_NON_CONVERGENCE = 4,
  FV_STATUS_RANGE = 5,
  FV_STATUS_DEGENERATE = 6,
  FV_STATUS_SIZE = 7,
  FV_STATUS_INFEASIBLE = 8,
  FV_STATUS_UNSUPPORTED = 9,
  FV_STATUS_INVALID_PARAMETER = 10,
  FV_STATUS_CONDITIONING = 11,
  FV_STATUS_IO = 12,
  FV_STATUS_NULL_POINTER = 13,
  FV_STATUS_PANIC = 14,
} FvStatus;

/**
 * Arctic boundary of the boxed plane partition shape, as a closed polygon.
 */
typedef struct FvBoundary FvBoundary;

/**
 * Heat-bath sampler on a hexagon.
 */
typedef struct FvChain FvChain;

/**
 * Weight and fields of the model.
 */
typedef struct FvParams FvParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fv_version(void);

/**
 * Copies the last error message of this thread into `buf`, truncated and NUL-terminated.
 * Returns the full message length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t fv_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum FvStatus fv_params_new(double r, double x, double y, struct FvParams **out);

/**
 * # Safety
 * `p` must be null or a handle from `fv_params_new` not yet freed.
 */
void fv_params_free(struct FvParams *p);

/**
 * Largest Y accepted by the Bethe and free-energy routines (infinite when r > 1).
 *
 * # Safety
 * `p` must be a live params handle and `out` writable.
 */
enum FvStatus fv_params_y_ceiling(const struct FvParams *p, double *out);

/**
 * Log of the largest eigenvalue of the transfer matrix with `n` paths on a ring of `big_n` sites.
 *
 * # Safety
 * `p` must be a live params handle and `out` writable.
 */
enum FvStatus fv_leading_log_eigenvalue(const struct FvParams *p,
                                        size_t big_n,
                                        size_t n,
                                        double *out);

/**
 * Same quantity from the dense transfer matrix; limited to small rings.
 *
 * # Safety
 * `p` must be a live params handle and `out` writable.
 */
enum FvStatus fv_oracle_leading_eigenvalue(const struct FvParams *p,
                                           size_t big_n,
                                           size_t n,
                                           double *out);

/**
 * Free energy per site and the maximizing vertical density.
 *
 * # Safety
 * `p` must be a live params handle; both outputs writable.
 */
enum FvStatus fv_free_energy(const struct FvParams *p, double *value, double *s_star);

/**
 * Surface tension at slope (s, t); only the weight of `p` is used.
 *
 * # Safety
 * `p` must be a live params handle and `out` writable.
 */
enum FvStatus fv_surface_tension(const struct FvParams *p, double s, double t, double *out);

/**
 * Gradient of the surface tension at slope (s, t).
 *
 * # Safety
 * `p` must be a live params handle; both outputs writable.
 */
enum FvStatus fv_tension_gradient(const struct FvParams *p,
                                  double s,
                                  double t,
                                  double *dx,
                                  double *dy);

/**
 * Bloch-Wigner dilogarithm at re + i im.
 *
 * # Safety
 * `out` must be writable.
 */
enum FvStatus fv_bloch_wigner(double re, double im, double *out);

/**
 * Traces the arctic boundary with `per_piece` samples on each boundary piece.
 *
 * # Safety
 * `p` must be a live params handle and `out` a valid handle slot.
 */
enum FvStatus fv_boundary_new(const struct FvParams *p, size_t per_piece, struct FvBoundary **out);

/**
 * # Safety
 * `b` must be null or a handle from `fv_boundary_new` not yet freed.
 */
void fv_boundary_free(struct FvBoundary *b);

/**
 * Number of polygon vertices.
 *
 * # Safety
 * `b` must be a live boundary handle and `out` writable.
 */
enum FvStatus fv_boundary_len(const struct FvBoundary *b, size_t *out);

/**
 * Copies up to `cap` vertices as interleaved x, y pairs into `xy` (length 2 * cap).
 * `written` receives the number of vertices copied.
 *
 * # Safety
 * `b` must be a live boundary handle, `xy` must hold `2 * cap` doubles, `written` writable.
 */
enum FvStatus fv_boundary_points(const struct FvBoundary *b,
                                 double *xy,
                                 size_t cap,
                                 size_t *written);

/**
 * Sampler on the hexagon of side `n`, started from the empty partition.
 *
 * # Safety
 * `out` must be a valid handle slot.
 */
enum FvStatus fv_chain_new(size_t n, double r, uint64_t seed, struct FvChain **out);

/**
 * # Safety
 * `c` must be null or a handle from `fv_chain_new` not yet freed.
 */
void fv_chain_free(struct FvChain *c);

/**
 * Runs `sweeps` heat-bath sweeps.
 *
 * # Safety
 * `c` must be a live chain handle.
 */
enum FvStatus fv_chain_sweep(struct FvChain *c, uint64_t sweeps);

/**
 * Height at face (i, j), with 0 <= i, j <= 2n and |i - j| <= n.
 *
 * # Safety
 * `c` must be a live chain handle and `out` writable.
 */
enum FvStatus fv_chain_height(const struct FvChain *c, size_t i, size_t j, int32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIVEVERTEX_H */
