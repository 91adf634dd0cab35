#ifndef DELTANLS_H
#define DELTANLS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Call outcome. Nonzero values match the command-line exit codes where
// both exist.
typedef enum NdStatus {
  ND_STATUS_OK = 0,
  ND_STATUS_IO = 1,
  ND_STATUS_VALIDATION = 2,
  ND_STATUS_NUMERICAL = 3,
  ND_STATUS_GUARD = 4,
  ND_STATUS_NULL_POINTER = 5,
  ND_STATUS_PANIC = 6,
} NdStatus;

// Periodic grid on `[-L, L)`.
typedef struct NdGrid NdGrid;

// Complex samples on an [`NdGrid`].
typedef struct NdWave NdWave;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *nd_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *nd_version(void);

enum NdStatus nd_grid_new(double half_width, size_t num_points, struct NdGrid **out);

void nd_grid_free(struct NdGrid *grid);

// Number of nodes, or 0 for a null handle.
size_t nd_grid_num_points(const struct NdGrid *grid);

// Node spacing, or NaN for a null handle.
double nd_grid_spacing(const struct NdGrid *grid);

// Writes the nodes into `x[0..len)`; `len` must be at least the node count.
enum NdStatus nd_grid_nodes(const struct NdGrid *grid, double *x, size_t len);

// Gaussian `(2 pi sigma^2)^(-1/4) exp(-x^2 / (4 sigma^2))` sampled on `grid`.
enum NdStatus nd_wave_gaussian(const struct NdGrid *grid, double sigma, struct NdWave **out);

// Copies `len` complex samples given as separate real and imaginary arrays.
enum NdStatus nd_wave_from_parts(const struct NdGrid *grid,
                                 const double *re,
                                 const double *im,
                                 size_t len,
                                 struct NdWave **out);

void nd_wave_free(struct NdWave *wave);

// Sample count, or 0 for a null handle.
size_t nd_wave_len(const struct NdWave *wave);

// Writes real and imaginary parts into `re[0..len)` and `im[0..len)`.
enum NdStatus nd_wave_values(const struct NdWave *wave, double *re, double *im, size_t len);

// Discrete L² norm, or NaN for a null handle.
double nd_wave_l2_norm(const struct NdWave *wave);

// Concentrated Hartree evolution with a Gaussian bump of width `eps`.
enum NdStatus nd_hartree_evolve(const struct NdWave *initial,
                                double eps,
                                double mu,
                                double dt,
                                double t_final,
                                struct NdWave **out);

// Hartree energy `(1/2)||u'||^2 + (mu/4) <w_eps, |u|^2>^2`.
enum NdStatus nd_hartree_energy(const struct NdWave *wave, double eps, double mu, double *out);

// Charges `q(k step)` for `k = 0..=n_nodes`; the buffers need `n_nodes + 1` slots.
enum NdStatus nd_delta_charge(const struct NdWave *initial,
                              double mu,
                              double step,
                              size_t n_nodes,
                              double *re,
                              double *im,
                              size_t len);

// Delta-NLS state at `t`, which must be a multiple of `step`.
enum NdStatus nd_delta_evolve(const struct NdWave *initial,
                              double mu,
                              double step,
                              double t,
                              struct NdWave **out);

// Delta-NLS energy `(1/2)||phi'||^2 + (mu/4)|phi(0)|^4`.
enum NdStatus nd_delta_energy(const struct NdWave *wave, double mu, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DELTANLS_H */
