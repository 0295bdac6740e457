/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef POLYVEM_H
#define POLYVEM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PvStatus {
  PV_STATUS_OK = 0,
  // A required pointer argument was null.
  PV_STATUS_NULL_POINTER = 1,
  // Bad parameters, mesh or names.
  PV_STATUS_INVALID_INPUT = 2,
  // Assembly, solve or a residual check failed.
  PV_STATUS_NUMERICAL = 3,
  // An internal panic was caught.
  PV_STATUS_INTERNAL = 4,
} PvStatus;

// Opaque polygonal mesh.
typedef struct PvMesh PvMesh;

// Polynomial regularity and degree of the discrete space.
typedef struct PvSpace {
  uint32_t p1;
  uint32_t p2;
  uint32_t r;
  // Request the enhanced load even when the cell moments suffice. Spaces
  // whose degree is too low for cell moments use it regardless.
  bool enhanced;
} PvSpace;

// Errors of one manufactured-solution run.
typedef struct PvReport {
  double h;
  uintptr_t n_dof;
  double energy_err;
  double h_p1_seminorm_err;
  double l2_err;
  double energy_norm;
  double relative_residual;
  double assemble_s;
  double solve_s;
} PvReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next `pv_*` call on the same thread.
const char *pv_last_error_message(void);

// Library version as a static nul-terminated string.
const char *pv_version(void);

// Generates a mesh of the unit square. `family` is one of `square`,
// `perturbed` or `hex` (or the long names).
//
// # Safety
// `family` must be a nul-terminated string and `out` a valid pointer.
enum PvStatus pv_mesh_generate(const char *family,
                               uint32_t level,
                               uint64_t seed,
                               struct PvMesh **out);

// Builds a mesh from vertex coordinates `xy` (interleaved, length
// `2 * n_vertices`) and counterclockwise cells in compressed form: the
// vertices of cell `c` are `indices[offsets[c]..offsets[c + 1]]`.
//
// # Safety
// The arrays must have the stated lengths and `out` must be valid.
enum PvStatus pv_mesh_from_arrays(const double *xy,
                                  uintptr_t n_vertices,
                                  const uintptr_t *offsets,
                                  const uintptr_t *indices,
                                  uintptr_t n_cells,
                                  struct PvMesh **out);

// Releases a mesh. Null is ignored.
//
// # Safety
// `mesh` must come from a `pv_mesh_*` constructor and not be used again.
void pv_mesh_free(struct PvMesh *mesh);

// Number of cells, or 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
uintptr_t pv_mesh_num_cells(const struct PvMesh *mesh);

// # Safety
// `mesh` must be null or a live handle.
uintptr_t pv_mesh_num_vertices(const struct PvMesh *mesh);

// Local DOF count of a cell with `n_vertices` vertices.
//
// # Safety
// `out` must be a valid pointer.
enum PvStatus pv_local_dim(struct PvSpace space, uintptr_t n_vertices, uintptr_t *out);

// Solves the clamped problem with a manufactured solution (`sin`,
// `bubble` or `poly-patch`) and reports the errors.
//
// # Safety
// `mesh` must be a live handle, `solution` a nul-terminated string and
// `report` a valid pointer.
enum PvStatus pv_solve_manufactured(const struct PvMesh *mesh,
                                    struct PvSpace space,
                                    const char *solution,
                                    struct PvReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYVEM_H */
