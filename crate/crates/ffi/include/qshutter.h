/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef QSHUTTER_H
#define QSHUTTER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum QsStatus {
  QS_STATUS_OK = 0,
  QS_STATUS_NULL_POINTER = 1,
  QS_STATUS_INVALID_ARGUMENT = 2,
  QS_STATUS_DOMAIN = 3,
  QS_STATUS_OVERFLOW = 4,
  QS_STATUS_OUT_OF_VALIDITY = 5,
  QS_STATUS_NUMERICAL = 6,
  QS_STATUS_PANIC = 7,
} QsStatus;

/**
 * Opaque set of poles with their resonant states.
 */
typedef struct QsPoleFamily QsPoleFamily;

/**
 * Opaque potential profile.
 */
typedef struct QsProfile QsProfile;

/**
 * Opaque transient solution for one incidence energy.
 */
typedef struct QsSeries QsSeries;

typedef struct QsComplex {
  double re;
  double im;
} QsComplex;

/**
 * One resonance pole. Energies and widths in meV, k in nm⁻¹.
 */
typedef struct QsPole {
  size_t index;
  struct QsComplex k;
  double energy;
  double width;
  double lifetime;
} QsPole;

/**
 * Buildup time scales in fs. `omega` and `tau_r` are NaN at exact resonance.
 */
typedef struct QsTimeScales {
  double detuning;
  double omega;
  double tau_r;
  double tau_l;
  double tau_b;
  bool crossover;
} QsTimeScales;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error of this thread into `buf` (NUL-terminated, truncated
 * to `len`). Returns the full message length excluding the NUL, 0 if none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t qs_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qs_version(void);

/**
 * Barrier / well / barrier profile. Heights in meV, widths in nm.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle to free with [`qs_profile_free`].
 */
enum QsStatus qs_profile_double_barrier(double barrier_height,
                                        double barrier_width,
                                        double well_width,
                                        double mass_ratio,
                                        struct QsProfile **out);

/**
 * The 230 meV / 5 nm / 5 nm / μ = 0.067 reference structure.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QsStatus qs_profile_canonical(struct QsProfile **out);

/**
 * # Safety
 * `profile` must be null or a handle from a `qs_profile_*` constructor, freed at most once.
 */
void qs_profile_free(struct QsProfile *profile);

/**
 * # Safety
 * Pointers must be valid.
 */
enum QsStatus qs_profile_length(const struct QsProfile *profile, double *out);

/**
 * |t(E)|² at energy E in meV.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QsStatus qs_transmission(const struct QsProfile *profile, double energy, double *out);

/**
 * Lowest `count` poles of the profile.
 *
 * # Safety
 * Pointers must be valid; free the result with [`qs_pole_family_free`].
 */
enum QsStatus qs_pole_family_build(const struct QsProfile *profile,
                                   size_t count,
                                   struct QsPoleFamily **out);

/**
 * # Safety
 * `family` must be null or a handle from [`qs_pole_family_build`], freed at most once.
 */
void qs_pole_family_free(struct QsPoleFamily *family);

/**
 * # Safety
 * Pointers must be valid.
 */
enum QsStatus qs_pole_family_len(const struct QsPoleFamily *family, size_t *out);

/**
 * Pole at 0-based `position` (ordered by energy).
 *
 * # Safety
 * Pointers must be valid.
 */
enum QsStatus qs_pole_family_get(const struct QsPoleFamily *family,
                                 size_t position,
                                 struct QsPole *out);

/**
 * Time scales for incidence at `energy` near pole `pole_index` (1-based).
 * The first `tau_m_len` maxima times are written to `tau_m` when non-null.
 *
 * # Safety
 * `family` and `out` must be valid; `tau_m` null or `tau_m_len` writable doubles.
 */
enum QsStatus qs_time_scales(const struct QsPoleFamily *family,
                             size_t pole_index,
                             double energy,
                             double *tau_m,
                             size_t tau_m_len,
                             struct QsTimeScales *out);

/**
 * Transient solution at incidence energy `energy` (meV); `pole_index` names
 * the reference pole for detuning-based quantities.
 *
 * # Safety
 * Pointers must be valid; free the result with [`qs_series_free`].
 */
enum QsStatus qs_series_new(const struct QsProfile *profile,
                            const struct QsPoleFamily *family,
                            double energy,
                            size_t pole_index,
                            struct QsSeries **out);

/**
 * # Safety
 * `series` must be null or a handle from [`qs_series_new`], freed at most once.
 */
void qs_series_free(struct QsSeries *series);

/**
 * Ψ(x, t) for x ≥ 0 (nm, fs).
 *
 * # Safety
 * Pointers must be valid.
 */
enum QsStatus qs_series_psi(const struct QsSeries *series,
                            double x,
                            double t,
                            struct QsComplex *out);

/**
 * |Ψ/φ_k|² inside the structure, |Ψ/T_k|² beyond it.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QsStatus qs_series_density(const struct QsSeries *series, double x, double t, double *out);

/**
 * Faddeeva function w(z) on the whole plane.
 *
 * # Safety
 * `out` must be valid.
 */
enum QsStatus qs_faddeeva(struct QsComplex z, struct QsComplex *out);

/**
 * Moshinsky function M(y) = ½ e^{y²} erfc(y).
 *
 * # Safety
 * `out` must be valid.
 */
enum QsStatus qs_moshinsky(struct QsComplex y, struct QsComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSHUTTER_H */
