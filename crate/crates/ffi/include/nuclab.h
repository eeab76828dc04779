#ifndef NUCLAB_H
#define NUCLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum NuclabStatus {
  NUCLAB_STATUS_OK = 0,
  NUCLAB_STATUS_NULL_POINTER = 1,
  NUCLAB_STATUS_INVALID_UTF8 = 2,
  NUCLAB_STATUS_PARAMETER = 3,
  NUCLAB_STATUS_UNKNOWN_FAMILY = 4,
  NUCLAB_STATUS_GEOMETRY = 5,
  NUCLAB_STATUS_ADMISSIBILITY = 6,
  NUCLAB_STATUS_RESOLUTION = 7,
  NUCLAB_STATUS_FORMAT = 8,
  NUCLAB_STATUS_INFEASIBLE = 9,
  NUCLAB_STATUS_PRECONDITION = 10,
  NUCLAB_STATUS_IO = 11,
  NUCLAB_STATUS_OTHER = 12,
  NUCLAB_STATUS_PANIC = 13,
} NuclabStatus;

/**
 * Opaque construction handle.
 */
typedef struct NuclabConstruction NuclabConstruction;

/**
 * Opaque periodic grid field handle.
 */
typedef struct NuclabField NuclabField;

/**
 * Exact energy of a construction.
 */
typedef struct NuclabEnergy {
  double elastic;
  double surface;
  double epsilon;
  double total;
  /**
   * Support volume.
   */
  double volume;
} NuclabEnergy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *nuclab_last_error_message(void);

/**
 * Library version, static storage.
 */
const char *nuclab_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void nuclab_string_free(char *s);

/**
 * Builds a construction from JSON parameters such as
 * `{"family": "lens21", "lambda": 0.5, "L": 2, "H": 4}`.
 *
 * # Safety
 * `params_json` must be a NUL-terminated string; `out` must be writable.
 */
enum NuclabStatus nuclab_construction_new(const char *params_json, struct NuclabConstruction **out);

/**
 * # Safety
 * `c` must come from [`nuclab_construction_new`] and not be freed twice.
 */
void nuclab_construction_free(struct NuclabConstruction *c);

/**
 * Dimension, target volume and cell count of a construction.
 *
 * # Safety
 * `c` must be a live handle; the output pointers must be writable.
 */
enum NuclabStatus nuclab_construction_info(const struct NuclabConstruction *c,
                                           uint32_t *n,
                                           double *volume,
                                           uintptr_t *cells);

/**
 * Exact energy at surface weight `epsilon`, after the admissibility check.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum NuclabStatus nuclab_construction_energy(const struct NuclabConstruction *c,
                                             double epsilon,
                                             struct NuclabEnergy *out);

/**
 * Scene of a construction as JSON. Free with [`nuclab_string_free`].
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum NuclabStatus nuclab_construction_json(const struct NuclabConstruction *c, char **out);

/**
 * Samples the phase indicator on a periodic grid.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum NuclabStatus nuclab_construction_rasterize(const struct NuclabConstruction *c,
                                                uint32_t resolution,
                                                double padding,
                                                struct NuclabField **out);

/**
 * Reads a field file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum NuclabStatus nuclab_field_read(const char *path, struct NuclabField **out);

/**
 * Writes a field file.
 *
 * # Safety
 * `f` must be a live handle; `path` must be a NUL-terminated string.
 */
enum NuclabStatus nuclab_field_write(const struct NuclabField *f, const char *path);

/**
 * # Safety
 * `f` must come from this library and not be freed twice.
 */
void nuclab_field_free(struct NuclabField *f);

/**
 * Dimension, points per axis and box side.
 *
 * # Safety
 * `f` must be a live handle; the output pointers must be writable.
 */
enum NuclabStatus nuclab_field_dims(const struct NuclabField *f,
                                    uint32_t *n,
                                    uint32_t *resolution,
                                    double *side);

/**
 * Read-only view of component `j` (`resolutionⁿ` values, first axis most
 * significant). Valid while the handle lives.
 *
 * # Safety
 * `f` must be a live handle; the output pointers must be writable.
 */
enum NuclabStatus nuclab_field_component(const struct NuclabField *f,
                                         uint32_t j,
                                         const double **data,
                                         uintptr_t *len);

/**
 * Relaxed elastic energy of the field and its zero-frequency term.
 *
 * # Safety
 * `f` must be a live handle; the output pointers must be writable.
 */
enum NuclabStatus nuclab_spectral_elastic(const struct NuclabField *f,
                                          double *elastic,
                                          double *k0_term);

/**
 * Spectral mass of component `component` outside the cone around `axis`.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum NuclabStatus nuclab_cone_residual(const struct NuclabField *f,
                                       uint32_t axis,
                                       double mu,
                                       double radius,
                                       uint32_t component,
                                       double *out);

/**
 * Low-frequency mass of the `axis` component and its a-priori bound.
 *
 * # Safety
 * `f` must be a live handle; the output pointers must be writable.
 */
enum NuclabStatus nuclab_low_frequency_mass(const struct NuclabField *f,
                                            uint32_t axis,
                                            double mu,
                                            double radius,
                                            double *mass,
                                            double *bound);

/**
 * Large-volume exponent of an order-`m` chain in dimension `n`, as a
 * reduced fraction.
 *
 * # Safety
 * The output pointers must be writable.
 */
enum NuclabStatus nuclab_lower_exponent(uint32_t n, uint32_t m, int64_t *num, int64_t *den);

/**
 * Predicted exponents as JSON for a key such as
 * `{"family": {"family": "lens21", "n": null}}` or `{"chain": {"n": 3, "m": 2}}`.
 * Free the result with [`nuclab_string_free`].
 *
 * # Safety
 * `key_json` must be a NUL-terminated string; `out` must be writable.
 */
enum NuclabStatus nuclab_predicted_scaling(const char *key_json, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NUCLAB_H */
