#ifndef HAARGP_H
#define HAARGP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HgpGroup {
  HGP_GROUP_UNITARY = 0,
  HGP_GROUP_ORTHOGONAL = 1,
} HgpGroup;

typedef enum HgpStatus {
  HGP_STATUS_OK = 0,
  HGP_STATUS_NULL_POINTER = 1,
  HGP_STATUS_INVALID_ARGUMENT = 2,
  HGP_STATUS_CAPACITY = 3,
  HGP_STATUS_SINGULAR_GRAM = 4,
  HGP_STATUS_REAL_STATES_REQUIRED = 5,
  HGP_STATUS_DOMAIN = 6,
  HGP_STATUS_MEMORY_GUARD = 7,
  HGP_STATUS_UNSUPPORTED = 8,
  HGP_STATUS_IO = 9,
  HGP_STATUS_PANIC = 10,
} HgpStatus;

// Hermitian matrix of state inner products `⟨ψ_i|ψ_j⟩`.
typedef struct HgpOverlaps HgpOverlaps;

// Row-major Monte Carlo samples of `C(ρ_j)`.
typedef struct HgpSamples HgpSamples;

// Weingarten matrix for one `(group, k, d)`.
typedef struct HgpWeingarten HgpWeingarten;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hgp_version(void);

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL.
//
// # Safety
// `buf` must be NULL or point to `len` writable bytes.
size_t hgp_last_error_message(char *buf, size_t len);

// Builds the exact Weingarten matrix. Singular Gram matrices are an error.
//
// # Safety
// `out` must be a valid pointer.
enum HgpStatus hgp_weingarten_new(enum HgpGroup group,
                                  size_t k,
                                  uint64_t d,
                                  struct HgpWeingarten **out_table);

// Number of basis elements (`k!` or `(2k-1)!!`).
//
// # Safety
// `table` must come from [`hgp_weingarten_new`].
enum HgpStatus hgp_weingarten_dim(const struct HgpWeingarten *table, size_t *out_dim);

// Entry `(i, j)` rounded to `double`.
//
// # Safety
// `table` must come from [`hgp_weingarten_new`].
enum HgpStatus hgp_weingarten_entry(const struct HgpWeingarten *table,
                                    size_t i,
                                    size_t j,
                                    double *out_value);

// # Safety
// `table` must be NULL or come from [`hgp_weingarten_new`], and is invalid afterwards.
void hgp_weingarten_free(struct HgpWeingarten *table);

// Overlap matrix from `m` state vectors of dimension `d`, stored as
// interleaved `(re, im)` pairs, state after state (`2·m·d` doubles).
//
// # Safety
// `amplitudes` must point to `2·m·d` doubles.
enum HgpStatus hgp_overlaps_from_states(const double *amplitudes,
                                        size_t m,
                                        size_t d,
                                        struct HgpOverlaps **out_overlaps);

// Overlap matrix from a real symmetric `m×m` row-major array.
//
// # Safety
// `entries` must point to `m·m` doubles.
enum HgpStatus hgp_overlaps_from_real(const double *entries,
                                      size_t m,
                                      struct HgpOverlaps **out_overlaps);

// # Safety
// `overlaps` must be NULL or a live handle, and is invalid afterwards.
void hgp_overlaps_free(struct HgpOverlaps *overlaps);

// Exact `E[C(ρ_{a_0}) ⋯ C(ρ_{a_{k-1}})]` for a traceless Pauli observable.
//
// # Safety
// `assignment` must point to `k` indices into `overlaps`.
enum HgpStatus hgp_exact_moment(enum HgpGroup group,
                                uint64_t d,
                                const struct HgpOverlaps *overlaps,
                                const size_t *assignment,
                                size_t k,
                                double *out_re,
                                double *out_im);

// Large-`d` pairing sum for the same moment.
//
// # Safety
// `assignment` must point to `k` indices into `overlaps`.
enum HgpStatus hgp_asymptotic_moment(enum HgpGroup group,
                                     uint64_t d,
                                     const struct HgpOverlaps *overlaps,
                                     const size_t *assignment,
                                     size_t k,
                                     double *out_value);

// Exact `Cov[C(ρ), C(ρ')]` as a function of the fidelity `Tr[ρρ']`.
//
// # Safety
// `out_value` must be a valid pointer.
enum HgpStatus hgp_exact_covariance(double fidelity,
                                    uint64_t d,
                                    enum HgpGroup group,
                                    double *out_value);

// Samples `n` Haar draws of `C(ρ_j)` for a named dataset (`zero`, `ghz-pair`,
// `basis:4`, …) on `qubits` qubits and a Pauli observable (`Z1`, `XZII`, …).
//
// # Safety
// `dataset` and `observable` must be NUL-terminated strings.
enum HgpStatus hgp_sample_outputs(size_t qubits,
                                  const char *dataset,
                                  const char *observable,
                                  enum HgpGroup group,
                                  size_t n,
                                  uint64_t seed,
                                  struct HgpSamples **out_samples);

// # Safety
// `samples` must be a live handle.
enum HgpStatus hgp_samples_shape(const struct HgpSamples *samples,
                                 size_t *out_rows,
                                 size_t *out_cols);

// Copies the row-major values into `buf`, which must hold `rows·cols` doubles.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum HgpStatus hgp_samples_copy(const struct HgpSamples *samples, double *buf, size_t len);

// # Safety
// `samples` must be NULL or a live handle, and is invalid afterwards.
void hgp_samples_free(struct HgpSamples *samples);

// `σ = √(f/d)`.
//
// # Safety
// `out_value` must be a valid pointer.
enum HgpStatus hgp_output_sigma(uint64_t d, enum HgpGroup group, double *out_value);

// `P(|X| ≥ c)` for `X ~ N(0, σ²)`.
//
// # Safety
// `out_value` must be a valid pointer.
enum HgpStatus hgp_gaussian_tail(double c, double sigma, double *out_value);

// Union bound on `P(|∂C| ≥ c)` for the unitary group.
//
// # Safety
// `out_value` must be a valid pointer.
enum HgpStatus hgp_gradient_tail_bound(double c, uint64_t d, double *out_value);

// Bound on `P(|ℒ − Eℒ| ≥ c)` for the squared loss with label `y`.
//
// # Safety
// `out_value` must be a valid pointer.
enum HgpStatus hgp_loss_tail_bound(double c,
                                   double y,
                                   uint64_t d,
                                   enum HgpGroup group,
                                   double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAARGP_H */
