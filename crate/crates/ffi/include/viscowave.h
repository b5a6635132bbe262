#ifndef VISCOWAVE_H
#define VISCOWAVE_H

/* Generated by cbindgen from viscowave-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum VwStatus {
  VwStatus_Ok = 0,
  // One or more verification verdicts failed (run entry points only).
  VwStatus_VerdictFailed = 1,
  VwStatus_RuntimeError = 2,
  VwStatus_InvalidArgument = 3,
  VwStatus_NullPointer = 4,
} VwStatus;

// Opaque three-component field handle.
typedef struct VwField VwField;

// Opaque periodic lattice handle.
typedef struct VwLattice VwLattice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version string of the underlying library; static storage, do not free.
const char *vw_version(void);

// Message of the last error on this thread; valid until the next failing
// call from the same thread. Do not free.
const char *vw_last_error(void);

// Create a lattice with `n` points per axis (even, >= 8) on a box of side
// `box_length`. Returns null on invalid arguments (see `vw_last_error`).
struct VwLattice *vw_lattice_new(uint32_t n, double box_length);

// # Safety
// `lattice` must be a pointer returned by [`vw_lattice_new`], not yet freed.
void vw_lattice_free(struct VwLattice *lattice);

// Number of lattice points (`n³`), or 0 for a null handle.
//
// # Safety
// `lattice` must be a valid handle or null.
uint64_t vw_lattice_len(const struct VwLattice *lattice);

// Create a zero field on the lattice. `spectral`: 0 physical, 1 spectral.
//
// # Safety
// `lattice` must be a valid handle.
struct VwField *vw_field_zeros(const struct VwLattice *lattice, int32_t spectral);

// Create a field from an interleaved buffer of `3 * n³ * 2` doubles
// (component-major, x-fastest, `(re, im)` pairs).
//
// # Safety
// `lattice` must be valid; `data` must point to `3 * n³ * 2` readable
// doubles.
struct VwField *vw_field_from_interleaved(const struct VwLattice *lattice,
                                          int32_t spectral,
                                          const double *data);

// Copy a field into an interleaved buffer of `3 * n³ * 2` doubles.
//
// # Safety
// `field` must be valid; `out` must point to `3 * n³ * 2` writable doubles.
enum VwStatus vw_field_copy_interleaved(const struct VwField *field, double *out);

// # Safety
// `field` must be a pointer returned by a `vw_field_*` constructor.
void vw_field_free(struct VwField *field);

// Current representation: 0 physical, 1 spectral, -1 on null.
//
// # Safety
// `field` must be valid or null.
int32_t vw_field_representation(const struct VwField *field);

// Transform a field in place to the spectral representation.
//
// # Safety
// `field` must be a valid, uniquely owned handle.
enum VwStatus vw_field_to_spectral(struct VwField *field);

// Transform a field in place to the physical representation.
//
// # Safety
// `field` must be a valid, uniquely owned handle.
enum VwStatus vw_field_to_physical(struct VwField *field);

// `L^p` norm of a field (`p = INFINITY` for the sup norm).
//
// # Safety
// `field` must be valid; `out` must point to a writable double.
enum VwStatus vw_field_lp_norm(const struct VwField *field, double p, double *out);

// Damped-wave kernel values `(K0, K1, dtK0, dtK1)` for one mode.
//
// # Safety
// `out` must point to four writable doubles.
enum VwStatus vw_kernel_multipliers(double nu, double beta, double r, double t, double *out);

// Diffusion-wave multiplier values `(G0, G1)` for one mode.
//
// # Safety
// `out` must point to two writable doubles.
enum VwStatus vw_diffusion_multipliers(double nu, double beta, double r, double t, double *out);

// Evolve linear initial data `(f0, f1)` to time `t`; on success the outputs
// receive newly allocated spectral fields (free with `vw_field_free`).
//
// # Safety
// `f0`, `f1` must be valid handles on the same lattice; `u_out`, `ut_out`
// must be writable pointer slots.
enum VwStatus vw_linear_evolve(double lambda,
                               double mu,
                               double nu,
                               const struct VwField *f0,
                               const struct VwField *f1,
                               double t,
                               struct VwField **u_out,
                               struct VwField **ut_out);

// Run the nonlinear solver from `(f0, f1)` to a single output time,
// returning the final `(u, ut)` as new spectral fields.
// `form`: 0 = linear, 1 = grad_grad2, 2 = grad_gradt. `step <= 0` selects
// the default step size.
//
// # Safety
// Pointer arguments as in [`vw_linear_evolve`].
enum VwStatus vw_nonlinear_run(double lambda,
                               double mu,
                               double nu,
                               int32_t form,
                               double step,
                               const struct VwField *f0,
                               const struct VwField *f1,
                               double t,
                               struct VwField **u_out,
                               struct VwField **ut_out);

// Write a field snapshot in the binary EWSP format.
//
// # Safety
// `field` must be valid; `path` must be a NUL-terminated UTF-8 string.
enum VwStatus vw_field_save(const struct VwField *field,
                            double lambda,
                            double mu,
                            double nu,
                            double time,
                            const char *path);

// Read a field snapshot; on success `out` receives a new handle and
// `time_out` (when non-null) the stored time.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string; `out` must be a writable
// pointer slot.
enum VwStatus vw_field_load(const char *path, struct VwField **out, double *time_out);

// Run a full experiment from a config file (or bundled preset name), with
// an optional output-directory override. Mirrors the CLI exit semantics:
// `Ok` when every verdict passes, `VerdictFailed` when any fails.
//
// # Safety
// `config` must be a NUL-terminated UTF-8 string; `output_dir` may be null.
enum VwStatus vw_run_experiment(const char *config, const char *output_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VISCOWAVE_H */
