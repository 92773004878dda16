#ifndef TFEMDG_H
#define TFEMDG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TfemdgStatus {
  TFEMDG_STATUS_OK = 0,
  TFEMDG_STATUS_NULL_POINTER = 1,
  TFEMDG_STATUS_INVALID_ARGUMENT = 2,
  TFEMDG_STATUS_MALFORMED_MESH = 3,
  TFEMDG_STATUS_SOLVER_FAILURE = 4,
  TFEMDG_STATUS_IO = 5,
  TFEMDG_STATUS_PANIC = 6,
} TfemdgStatus;

typedef enum TfemdgSelector {
  TFEMDG_SELECTOR_ALL = 0,
  TFEMDG_SELECTOR_NONE = 1,
  /*
   Interfaces whose centroid is inside the ball `center`, `radius`.
   */
  TFEMDG_SELECTOR_CIRCLE = 2,
} TfemdgSelector;

/*
 Mesh with interface elements and its provenance.
 */
typedef struct TfemdgDgMesh TfemdgDgMesh;

/*
 Conforming input mesh.
 */
typedef struct TfemdgMesh TfemdgMesh;

/*
 Nodal solution with its error norms.
 */
typedef struct TfemdgSolution TfemdgSolution;

typedef struct TfemdgDgifyOptions {
  enum TfemdgSelector selector;
  /*
   Only the first `dim` entries are read.
   */
  double center[3];
  double radius;
  bool boundary_layer;
} TfemdgDgifyOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after success.
 The pointer stays valid until the next library call on this thread.
 */
const char *tfemdg_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *tfemdg_version(void);

/*
 Structured unit-domain mesh: interval (dim 1), criss-cross square
 (dim 2) or Kuhn-split cube (dim 3) with `n` cells per side.

 # Safety
 `out` must be a valid pointer to writable storage for a handle.
 */
enum TfemdgStatus tfemdg_mesh_generate(size_t dim, size_t n, struct TfemdgMesh **out);

/*
 Reads a mesh in the plain-text format written by the CLI.

 # Safety
 `path` must be a NUL-terminated string and `out` writable.
 */
enum TfemdgStatus tfemdg_mesh_read(const char *path, struct TfemdgMesh **out);

/*
 # Safety
 `mesh` must come from this library and not be used afterwards.
 */
void tfemdg_mesh_free(struct TfemdgMesh *mesh);

/*
 # Safety
 `mesh` must be a live handle; output pointers may be null.
 */
enum TfemdgStatus tfemdg_mesh_counts(const struct TfemdgMesh *mesh,
                                     size_t *vertices,
                                     size_t *elements);

/*
 Inserts interface elements into `mesh`.

 # Safety
 `mesh` must be a live handle, `options` readable and `out` writable.
 */
enum TfemdgStatus tfemdg_dgify(const struct TfemdgMesh *mesh,
                               const struct TfemdgDgifyOptions *options,
                               struct TfemdgDgMesh **out);

/*
 # Safety
 `dg` must come from this library and not be used afterwards.
 */
void tfemdg_dg_free(struct TfemdgDgMesh *dg);

/*
 # Safety
 `dg` must be a live handle; output pointers may be null.
 */
enum TfemdgStatus tfemdg_dg_counts(const struct TfemdgDgMesh *dg,
                                   size_t *vertices,
                                   size_t *elements,
                                   size_t *interfaces);

/*
 Solves the manufactured problem `case` with `j_min = h^exponent`, `h`
 the grid spacing, to relative residual `tol`.

 # Safety
 `dg` must be a live handle, `case` a NUL-terminated string and `out`
 writable.
 */
enum TfemdgStatus tfemdg_solve(const struct TfemdgDgMesh *dg,
                               const char *case_id,
                               double exponent,
                               double tol,
                               struct TfemdgSolution **out);

/*
 # Safety
 `sol` must come from this library and not be used afterwards.
 */
void tfemdg_solution_free(struct TfemdgSolution *sol);

/*
 Borrowed view of the nodal values, valid while `sol` lives.

 # Safety
 `sol` must be a live handle, `values` and `len` writable.
 */
enum TfemdgStatus tfemdg_solution_values(const struct TfemdgSolution *sol,
                                         const double **values,
                                         size_t *len);

/*
 Error norms against the exact solution and solver statistics. Output
 pointers may be null.

 # Safety
 `sol` must be a live handle.
 */
enum TfemdgStatus tfemdg_solution_stats(const struct TfemdgSolution *sol,
                                        double *err_l2,
                                        double *err_h1,
                                        size_t *iterations,
                                        double *residual);

/*
 Largest relative entrywise difference between the thresholded-FEM matrix
 and the directly assembled vertex-quadrature DG matrix at `j_min`.

 # Safety
 `dg` must be a live handle and `diff` writable.
 */
enum TfemdgStatus tfemdg_compare(const struct TfemdgDgMesh *dg, double j_min, double *diff);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TFEMDG_H */
