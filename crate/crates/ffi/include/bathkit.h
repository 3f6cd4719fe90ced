#ifndef BATHKIT_H
#define BATHKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BkStatus {
  BK_STATUS_OK = 0,
  BK_STATUS_NULL_POINTER = 1,
  BK_STATUS_INVALID_INPUT = 2,
  // A computation failed: divergence, accuracy, no convergence.
  BK_STATUS_NUMERICAL = 3,
  BK_STATUS_OUT_OF_RANGE = 4,
  BK_STATUS_PANIC = 5,
} BkStatus;

typedef enum BkStatistics {
  BK_STATISTICS_BOSE_EINSTEIN = 0,
  BK_STATISTICS_FERMI_DIRAC = 1,
} BkStatistics;

typedef enum BkFamily {
  BK_FAMILY_GLDD = 0,
  BK_FAMILY_TGLDD = 1,
  BK_FAMILY_MEIER_TANNOR = 2,
} BkFamily;

typedef enum BkSplitting {
  BK_SPLITTING_TROTTER = 0,
  BK_SPLITTING_STRANG = 1,
} BkSplitting;

typedef struct BkDensity BkDensity;

typedef struct BkEtaGrid BkEtaGrid;

typedef struct BkPadeParams BkPadeParams;

typedef struct BkSeries BkSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *bk_last_error(void);

// Builds a series from `n` weights `p` and rates `omega`, given as split real
// and imaginary arrays.
//
// # Safety
// Each array must hold `n` doubles; `out` must be writable.
enum BkStatus bk_series_new(const double *p_re,
                            const double *p_im,
                            const double *omega_re,
                            const double *omega_im,
                            size_t n,
                            struct BkSeries **out);

// # Safety
// `series` must be null or a handle not yet freed.
void bk_series_free(struct BkSeries *series);

// Number of terms; 0 for a null handle.
//
// # Safety
// `series` must be null or a live handle.
size_t bk_series_len(const struct BkSeries *series);

// # Safety
// `series` must be a live handle; the four outputs must be writable.
enum BkStatus bk_series_term(const struct BkSeries *series,
                             size_t index,
                             double *p_re,
                             double *p_im,
                             double *omega_re,
                             double *omega_im);

// `α(t) = Σ p_k e^{Ω_k t}`.
//
// # Safety
// `series` must be a live handle; `re` and `im` must be writable.
enum BkStatus bk_series_eval(const struct BkSeries *series, double t, double *re, double *im);

// `J(ω)` implied by the series at inverse temperature `beta`.
//
// # Safety
// `series` must be a live handle; `out` must be writable.
enum BkStatus bk_series_spectral_density(const struct BkSeries *series,
                                         double beta,
                                         double hbar,
                                         double omega,
                                         double *out);

// # Safety
// `out` must be writable.
enum BkStatus bk_pade_new(size_t order,
                          enum BkStatistics statistics,
                          double beta,
                          double hbar,
                          struct BkPadeParams **out);

// # Safety
// `params` must be null or a handle not yet freed.
void bk_pade_free(struct BkPadeParams *params);

// Pole `ξ_j` and residue weight `Ξ_j`, `j < order`.
//
// # Safety
// `params` must be a live handle; `xi` and `weight` must be writable.
enum BkStatus bk_pade_pole(const struct BkPadeParams *params, size_t j, double *xi, double *weight);

// Auxiliary rate `ζ_j`, `j < order − 1`.
//
// # Safety
// `params` must be a live handle; `zeta` must be writable.
enum BkStatus bk_pade_zeta(const struct BkPadeParams *params, size_t j, double *zeta);

// # Safety
// `params` must be null or a live handle.
size_t bk_pade_order(const struct BkPadeParams *params);

// Lorentzian family from `n` terms. `beta`/`hbar` fix the scaling temperature
// of `BK_FAMILY_TGLDD` and are ignored otherwise.
//
// # Safety
// The three arrays must hold `n` doubles; `out` must be writable.
enum BkStatus bk_density_lorentzian(enum BkFamily family,
                                    const double *lambda,
                                    const double *gamma,
                                    const double *omega_tilde,
                                    size_t n,
                                    double beta,
                                    double hbar,
                                    struct BkDensity **out);

// `J(ω) = A ω^s e^{−(ω/ω_c)^q}`.
//
// # Safety
// `out` must be writable.
enum BkStatus bk_density_power_law(double amplitude,
                                   double exponent,
                                   double omega_c,
                                   double stretch,
                                   struct BkDensity **out);

// # Safety
// `density` must be null or a handle not yet freed.
void bk_density_free(struct BkDensity *density);

// # Safety
// `density` must be a live handle; `out` must be writable.
enum BkStatus bk_density_eval(const struct BkDensity *density, double omega, double *out);

// Reorganization energy `∫_0^∞ J(ω)/ω dω`.
//
// # Safety
// `density` must be a live handle; `out` must be writable.
enum BkStatus bk_reorganization_energy(const struct BkDensity *density, double *out);

// `α(t)` by adaptive quadrature.
//
// # Safety
// `density` must be a live handle; `re` and `im` must be writable.
enum BkStatus bk_alpha_quadrature(const struct BkDensity *density,
                                  double beta,
                                  double hbar,
                                  double t,
                                  double *re,
                                  double *im);

// Padé series of a Lorentzian density. With `order == 0` the order is raised
// until the series matches quadrature to relative sup-norm `tol` on
// `t ∈ [0, 5βħ]`; `order_used` (may be null) receives the order.
//
// # Safety
// `density` must be a live handle; `out` must be writable.
enum BkStatus bk_alpha_series(const struct BkDensity *density,
                              double beta,
                              double hbar,
                              size_t order,
                              double tol,
                              struct BkSeries **out,
                              size_t *order_used);

// Fits `k` exponentials to `n` samples `(t_i, α_i)`. `weights` may be null.
// `rms` (may be null) receives the scaled RMS residual.
//
// # Safety
// `t`, `alpha_re`, `alpha_im` (and `weights` unless null) must hold `n`
// doubles; `out` must be writable.
enum BkStatus bk_fit(const double *t,
                     const double *alpha_re,
                     const double *alpha_im,
                     const double *weights,
                     size_t n,
                     size_t k,
                     uint64_t seed,
                     struct BkSeries **out,
                     double *rms);

// η coefficients for `steps` steps of size `dt`.
//
// # Safety
// `series` must be a live handle; `out` must be writable.
enum BkStatus bk_eta_new(const struct BkSeries *series,
                         double dt,
                         size_t steps,
                         enum BkSplitting splitting,
                         struct BkEtaGrid **out);

// Adds the QUAPI counter term `iΔtλ/(ħπ)` to the diagonal, in place.
//
// # Safety
// `grid` must be a live handle.
enum BkStatus bk_eta_quapi(struct BkEtaGrid *grid, double lambda, double hbar);

// `η_{k k′}` for `0 ≤ k′ ≤ k ≤ steps`.
//
// # Safety
// `grid` must be a live handle; `re` and `im` must be writable.
enum BkStatus bk_eta_get(const struct BkEtaGrid *grid, size_t k, size_t kp, double *re, double *im);

// # Safety
// `grid` must be null or a live handle.
size_t bk_eta_steps(const struct BkEtaGrid *grid);

// # Safety
// `grid` must be null or a handle not yet freed.
void bk_eta_free(struct BkEtaGrid *grid);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BATHKIT_H */
