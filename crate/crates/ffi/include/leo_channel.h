#ifndef LEO_CHANNEL_H
#define LEO_CHANNEL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum LcStatus {
  LC_STATUS_OK = 0,
  LC_STATUS_NULL_POINTER = 1,
  LC_STATUS_DOMAIN = 2,
  LC_STATUS_NO_VISIBLE_SATELLITES = 3,
  LC_STATUS_CONFIG = 4,
  LC_STATUS_RESOLUTION = 5,
  LC_STATUS_BUFFER_TOO_SMALL = 6,
  LC_STATUS_PANIC = 7,
} LcStatus;

/**
 * Opaque model handle.
 */
typedef struct LcModel LcModel;

/**
 * Constellation shell parameters. Angles in degrees.
 */
typedef struct LcShell {
  double earth_radius_m;
  double altitude_m;
  double sat_speed_mps;
  double carrier_hz;
  double inclination_deg;
  uint32_t n_sats;
  uint32_t n_per_orbit;
  double orbit_spacing_deg;
} LcShell;

/**
 * Global channel parameters.
 */
typedef struct LcSummary {
  double path_loss_db;
  double mean_delay_s;
  double rms_delay_spread_s;
  double mean_doppler_hz;
  double rms_doppler_spread_hz;
  double channel_spread;
  double availability;
  double grid_mean_doppler_hz;
} LcSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default shell: 3168 satellites at 550 km, 53 deg, 144 planes of 22.
 */
struct LcShell lc_shell_default(void);

/**
 * Creates a model for a user at `latitude_deg` with elevation mask
 * `min_elevation_deg`. `shell` may be null for the default shell.
 */
enum LcStatus lc_model_new(const struct LcShell *shell,
                           double latitude_deg,
                           double min_elevation_deg,
                           struct LcModel **out);

/**
 * Releases a model. Null is ignored.
 */
void lc_model_free(struct LcModel *model);

/**
 * Copies the last error message of this thread into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length.
 */
size_t lc_last_error_message(char *buf, size_t len);

/**
 * Probability that one satellite is visible.
 */
enum LcStatus lc_p_sat(const struct LcModel *model, double *out);

/**
 * Mean number of visible satellites.
 */
enum LcStatus lc_avg_visible(const struct LcModel *model, double *out);

/**
 * Probability that at least one satellite is visible.
 */
enum LcStatus lc_availability(const struct LcModel *model, double *out);

/**
 * Largest Doppler shift over the visible cap (Hz).
 */
enum LcStatus lc_max_doppler(const struct LcModel *model, double *out);

/**
 * Distribution function of the gain.
 */
enum LcStatus lc_gain_cdf(const struct LcModel *model, double gain, double *out);

/**
 * Density of the gain.
 */
enum LcStatus lc_gain_pdf(const struct LcModel *model, double gain, double *out);

/**
 * Distribution function of the delay.
 */
enum LcStatus lc_delay_cdf(const struct LcModel *model, double delay_s, double *out);

/**
 * Density of the delay.
 */
enum LcStatus lc_delay_pdf(const struct LcModel *model, double delay_s, double *out);

/**
 * Doppler distribution with both marks equally likely.
 */
enum LcStatus lc_doppler_cdf_mixed(const struct LcModel *model, double doppler_hz, double *out);

/**
 * Gain distribution under unit-mean Rayleigh power fading.
 */
enum LcStatus lc_rayleigh_gain_cdf(const struct LcModel *model, double gain, double *out);

/**
 * Doppler distribution of ascending (`mark > 0`) or descending satellites.
 */
enum LcStatus lc_doppler_cdf(const struct LcModel *model,
                             double doppler_hz,
                             int32_t mark,
                             double *out);

/**
 * Support `[min, max]` of the gain (1/m²) and of the delay (s).
 */
enum LcStatus lc_supports(const struct LcModel *model,
                          double *gain_min,
                          double *gain_max,
                          double *delay_min_s,
                          double *delay_max_s);

/**
 * Average path gain `ρ²` (1/m²) and path loss (dB).
 */
enum LcStatus lc_path_loss(const struct LcModel *model, double *rho2, double *path_loss_db);

/**
 * Global channel parameters on a grid with steps `nu_step_hz`, `tau_step_s`.
 */
enum LcStatus lc_global_params(const struct LcModel *model,
                               double nu_step_hz,
                               double tau_step_s,
                               struct LcSummary *out);

/**
 * Scattering function `C(τ, ν)` written row-major by delay into `values`.
 *
 * The grid dimensions are always stored in `n_tau` and `n_nu`. If
 * `values` is null or `capacity < n_tau * n_nu`, nothing else is written
 * and [`LcStatus::BufferTooSmall`] is returned. `tau_centers_s` (length
 * `n_tau`) and `nu_centers_hz` (length `n_nu`) may be null.
 */
enum LcStatus lc_scattering(const struct LcModel *model,
                            double nu_step_hz,
                            double tau_step_s,
                            double *values,
                            size_t capacity,
                            size_t *n_tau,
                            size_t *n_nu,
                            double *tau_centers_s,
                            double *nu_centers_hz);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEO_CHANNEL_H */
