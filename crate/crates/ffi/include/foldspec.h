#ifndef FOLDSPEC_H
#define FOLDSPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_INVALID_INPUT = 2,
  FS_STATUS_NON_CONVERGENCE = 3,
  FS_STATUS_NOT_UNIVALENT = 4,
  FS_STATUS_EVEN_DIMENSION = 5,
  FS_STATUS_NOT_MULTIPLE = 6,
  FS_STATUS_MESH = 7,
  FS_STATUS_BUFFER_TOO_SMALL = 8,
  FS_STATUS_IO = 9,
  FS_STATUS_NUMERIC = 10,
  FS_STATUS_PANIC = 99,
} FsStatus;

/**
 * Simply connected domain given by a univalent polynomial map of the disk.
 */
typedef struct FsDomain FsDomain;

/**
 * Measure on the disk or a sphere.
 */
typedef struct FsMeasure FsMeasure;

typedef struct FsConstants {
  double zeta;
  double mu1_disk;
  /**
   * `2μ₁(𝔻)π`
   */
  double planar_bound;
  /**
   * Sphere constant `(n+1)(2K_n)^{2/n}` for the requested `n`.
   */
  double theorem_constant;
  double conjecture_constant;
  double ratio;
  bool even_dimension;
} FsConstants;

typedef struct FsBoundReport {
  double area;
  double quotient_sup;
  double bound;
  double margin;
  /**
   * 0 for the simple (folded) branch, 1 for the multiple (direct) branch.
   */
  uint32_t branch;
  bool holds;
} FsBoundReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
size_t fs_last_error_message(char *buf, size_t len);

/**
 * Planar constants and the sphere constants for dimension `n`.
 *
 * # Safety
 * `out` must point to writable memory for one `FsConstants`.
 */
enum FsStatus fs_constants(uint32_t n, struct FsConstants *out);

/**
 * Builds a domain from `count` complex Taylor coefficients `c₁, c₂, …`
 * stored as interleaved `(re, im)` pairs.
 *
 * # Safety
 * `coeffs` must hold `2 * count` doubles; `out` must be writable.
 */
enum FsStatus fs_domain_new(const double *coeffs, size_t count, struct FsDomain **out);

/**
 * # Safety
 * `domain` must be null or a handle from [`fs_domain_new`] not yet freed.
 */
void fs_domain_free(struct FsDomain *domain);

/**
 * Area of the domain, or NaN for a null handle.
 *
 * # Safety
 * `domain` must be null or a live handle.
 */
double fs_domain_area(const struct FsDomain *domain);

/**
 * Pulls the area measure of `domain` back to the disk on an
 * `n_r × n_theta` polar grid.
 *
 * # Safety
 * `domain` must be a live handle and `out` writable.
 */
enum FsStatus fs_measure_pullback(const struct FsDomain *domain,
                                  size_t n_r,
                                  size_t n_theta,
                                  struct FsMeasure **out);

/**
 * Parses a measure from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum FsStatus fs_measure_from_json(const char *json, struct FsMeasure **out);

/**
 * # Safety
 * `measure` must be null or a live handle.
 */
void fs_measure_free(struct FsMeasure *measure);

/**
 * Number of atoms, or 0 for a null handle.
 *
 * # Safety
 * `measure` must be null or a live handle.
 */
size_t fs_measure_len(const struct FsMeasure *measure);

/**
 * Ambient dimension of the atoms (2 on the disk, `n + 1` on `𝕊ⁿ`).
 *
 * # Safety
 * `measure` must be null or a live handle.
 */
size_t fs_measure_dim(const struct FsMeasure *measure);

/**
 * # Safety
 * `measure` must be null or a live handle.
 */
double fs_measure_mass(const struct FsMeasure *measure);

/**
 * Renormalizing Möbius point `ξ` of the measure, written to `xi` (which
 * must hold [`fs_measure_dim`] doubles). `residual` may be null.
 *
 * # Safety
 * Pointers must be valid as described.
 */
enum FsStatus fs_renormalize(const struct FsMeasure *measure,
                             double tol,
                             uint64_t seed,
                             double *xi,
                             size_t xi_len,
                             double *residual);

/**
 * Rayleigh-quotient certificate of the planar bound for `domain`, with the
 * measure sampled on an `n_r × n_theta` grid.
 *
 * # Safety
 * `domain` must be a live handle and `out` writable.
 */
enum FsStatus fs_certify(const struct FsDomain *domain,
                         size_t n_r,
                         size_t n_theta,
                         struct FsBoundReport *out);

/**
 * Smallest `count` Neumann eigenvalues `μ₀ ≤ μ₁ ≤ …` of the domain
 * described by `spec` (the CLI spec syntax, e.g. `disk`, `rectangle:2,1`,
 * `neck:0.2,0.2` or JSON), meshed at size `h`. `count` must be at least 3.
 *
 * # Safety
 * `spec` must be NUL-terminated and `values` hold `count` doubles.
 */
enum FsStatus fs_fem_eigenvalues(const char *spec, double h, double *values, size_t count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOLDSPEC_H */
