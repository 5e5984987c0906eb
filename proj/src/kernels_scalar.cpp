#include "prl/kernels.hpp"

namespace prl::kernels {

namespace {

double sq_l2_f32_scalar(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

double dot_f64_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_f64_scalar(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void col_moments_f64_scalar(const double* data, std::size_t n, std::size_t d,
                            double* sum, double* sumsq) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = data + r * d;
        for (std::size_t c = 0; c < d; ++c) {
            sum[c] += row[c];
            sumsq[c] += row[c] * row[c];
        }
    }
}

void normalize_cols_f64_scalar(const double* in, std::size_t n, std::size_t d,
                               const double* mean, const double* inv_std, double* out) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* src = in + r * d;
        double* dst = out + r * d;
        for (std::size_t c = 0; c < d; ++c) dst[c] = (src[c] - mean[c]) * inv_std[c];
    }
}

void cross_corr_f64_scalar(const double* a, const double* b, std::size_t n,
                           std::size_t d, double* c) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* ar = a + r * d;
        const double* br = b + r * d;
        for (std::size_t i = 0; i < d; ++i) {
            const double ai = ar[i];
            double* crow = c + i * d;
            for (std::size_t j = 0; j < d; ++j) crow[j] += ai * br[j];
        }
    }
}

} // namespace

const Ops& scalar_ops() {
    static const Ops table{
        "scalar",
        sq_l2_f32_scalar,
        dot_f64_scalar,
        axpy_f64_scalar,
        col_moments_f64_scalar,
        normalize_cols_f64_scalar,
        cross_corr_f64_scalar,
    };
    return table;
}

} // namespace prl::kernels
