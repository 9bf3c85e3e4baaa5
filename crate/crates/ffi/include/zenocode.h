/* C interface for the zenocode coding and protection pipeline. */

#ifndef ZENOCODE_H
#define ZENOCODE_H

/* Generated with cbindgen:0.27.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes shared by every entry point.
typedef enum ZcStatus {
  ZC_STATUS_OK = 0,
  ZC_STATUS_NULL_POINTER = 1,
  ZC_STATUS_INVALID_ARGUMENT = 2,
  ZC_STATUS_NOT_CONVERGED = 3,
  ZC_STATUS_NUMERICAL_ERROR = 4,
} ZcStatus;

// A converged (or best-effort) code space (opaque).
typedef struct ZcCodeSpace ZcCodeSpace;

// A unitary coding matrix (opaque).
typedef struct ZcCodingMatrix ZcCodingMatrix;

// A set of Hermitian error generators (opaque).
typedef struct ZcGeneratorSet ZcGeneratorSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// ABI version of this header; bumped on any breaking change.
uint32_t zc_abi_version(void);

// Copy the last error message (UTF-8, NUL-terminated) into `buf`.
// Returns the full length including the terminator; if `cap` is smaller,
// the copy is truncated. `buf` may be null to query the length.
size_t zc_last_error_message(char *buf, size_t cap);

// Packing feasibility: sets `*out_satisfied` to 1 when A - 1 >= M.
enum ZcStatus zc_hamming_bound(size_t ancilla_dim, size_t generator_count, int32_t *out_satisfied);

// Seeded random Hermitian generator set with unit spectral norms.
enum ZcStatus zc_generator_set_random(size_t dim,
                                      size_t count,
                                      uint64_t seed,
                                      struct ZcGeneratorSet **out);

// Generator set from caller-provided matrices: `entries` holds `count`
// matrices back to back, each `dim * dim` row-major interleaved complex
// entries (so `count * dim * dim * 2` doubles in total).  Each matrix must
// be Hermitian; the set must be linearly independent.
enum ZcStatus zc_generator_set_from_entries(size_t dim,
                                            size_t count,
                                            const double *entries,
                                            struct ZcGeneratorSet **out);

size_t zc_generator_set_dim(const struct ZcGeneratorSet *gens);

size_t zc_generator_set_len(const struct ZcGeneratorSet *gens);

void zc_generator_set_free(struct ZcGeneratorSet *gens);

// Iterative code search.  `*out_iterations` and `*out_residual` are always
// filled; `*out_code` is set only on convergence (status `Ok`), otherwise
// the status is `NotConverged` and no handle is produced.
enum ZcStatus zc_find_code(const struct ZcGeneratorSet *gens,
                           size_t code_dim,
                           double tol,
                           size_t max_iter,
                           uint64_t seed,
                           struct ZcCodeSpace **out_code,
                           size_t *out_iterations,
                           double *out_residual);

size_t zc_code_space_dim(const struct ZcCodeSpace *code);

size_t zc_code_space_code_dim(const struct ZcCodeSpace *code);

double zc_code_space_residual(const struct ZcCodeSpace *code);

// Copy codeword `index` as `dim` interleaved complex doubles into `buf`
// (capacity `cap` doubles; needs `2 * dim`).
enum ZcStatus zc_code_space_codeword(const struct ZcCodeSpace *code,
                                     size_t index,
                                     double *buf,
                                     size_t cap);

void zc_code_space_free(struct ZcCodeSpace *code);

// Extend a converged code space to a full unitary coding matrix.
enum ZcStatus zc_complete_coding_matrix(const struct ZcCodeSpace *code,
                                        uint64_t seed,
                                        struct ZcCodingMatrix **out);

size_t zc_coding_matrix_dim(const struct ZcCodingMatrix *cm);

// Copy the full coding matrix, row-major interleaved, into `buf`
// (capacity `cap` doubles; needs `2 * dim * dim`).
enum ZcStatus zc_coding_matrix_entries(const struct ZcCodingMatrix *cm, double *buf, size_t cap);

void zc_coding_matrix_free(struct ZcCodingMatrix *cm);

// Deterministic protection run under constant fields.
//
// `field_amplitudes` holds one amplitude per generator.  The initial state
// is the first information basis vector.  On success `*out_cumulative_survival`
// is the product of per-cycle survival probabilities and
// `*out_final_fidelity` the fidelity to the initial state after the last
// cycle.
enum ZcStatus zc_run_protection(const struct ZcCodingMatrix *coding,
                                const struct ZcGeneratorSet *gens,
                                const double *field_amplitudes,
                                double tau_z,
                                size_t n_cycles,
                                double dt,
                                uint64_t seed,
                                double *out_cumulative_survival,
                                double *out_final_fidelity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZENOCODE_H */
