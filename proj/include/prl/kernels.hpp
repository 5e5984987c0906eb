#pragma once

#include <cstddef>

namespace prl::kernels {

// Data-parallel inner loops used by the embedding-facing modules: squared
// Euclidean distance for neighbor search, column moments / normalization /
// cross-correlation for the twin-view loss. Each operation has a scalar
// reference implementation and, on x86-64, an AVX2+FMA variant. The active
// set is selected once at runtime from CPU capabilities and can be forced
// (tests compare backends for equivalence).
//
// All accumulations are in double, including over float inputs, so that
// orderings derived from the results (e.g. nearest-neighbor ranks) are
// stable across backends.

struct Ops {
    const char* name;

    // Sum of (a[i]-b[i])^2 over float inputs.
    double (*sq_l2_f32)(const float* a, const float* b, std::size_t n);

    // Dot product over double inputs.
    double (*dot_f64)(const double* a, const double* b, std::size_t n);

    // y[i] += alpha * x[i]
    void (*axpy_f64)(double* y, double alpha, const double* x, std::size_t n);

    // Row-major n x d matrix: per-column sum and sum of squares (added into
    // the provided accumulators, which the caller zero-initializes).
    void (*col_moments_f64)(const double* data, std::size_t n, std::size_t d,
                            double* sum, double* sumsq);

    // out[r][c] = (in[r][c] - mean[c]) * inv_std[c]
    void (*normalize_cols_f64)(const double* in, std::size_t n, std::size_t d,
                               const double* mean, const double* inv_std, double* out);

    // c (d x d, row-major) += a^T b over row-major n x d inputs.
    void (*cross_corr_f64)(const double* a, const double* b, std::size_t n,
                           std::size_t d, double* c);
};

enum class Backend { auto_detect, scalar, avx2 };

// The active operation set (dispatch happens on first use).
const Ops& ops();

// Force a backend; throws if the requested backend is unavailable on this
// machine. Intended for tests and the CLI's --kernel flag.
void force_backend(Backend b);

const char* active_backend_name();
bool cpu_supports_avx2();

// Reference (scalar) set, always available; equivalence tests compare the
// active set against this one.
const Ops& scalar_ops();

} // namespace prl::kernels
