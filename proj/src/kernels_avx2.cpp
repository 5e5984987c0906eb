// AVX2+FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; execution is gated by the runtime dispatcher.

#include "prl/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace prl::kernels {

namespace {

inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double sq_l2_f32_avx2(const float* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 af = _mm256_loadu_ps(a + i);
        const __m256 bf = _mm256_loadu_ps(b + i);
        // Widen to double before accumulating; matches scalar reference.
        const __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(af));
        const __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(af, 1));
        const __m256d b_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(bf));
        const __m256d b_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(bf, 1));
        const __m256d d_lo = _mm256_sub_pd(a_lo, b_lo);
        const __m256d d_hi = _mm256_sub_pd(a_hi, b_hi);
        acc0 = _mm256_fmadd_pd(d_lo, d_lo, acc0);
        acc1 = _mm256_fmadd_pd(d_hi, d_hi, acc1);
    }
    double acc = hsum256(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

double dot_f64_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum256(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_f64_avx2(double* y, double alpha, const double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void col_moments_f64_avx2(const double* data, std::size_t n, std::size_t d,
                          double* sum, double* sumsq) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = data + r * d;
        std::size_t c = 0;
        for (; c + 4 <= d; c += 4) {
            const __m256d v = _mm256_loadu_pd(row + c);
            _mm256_storeu_pd(sum + c, _mm256_add_pd(_mm256_loadu_pd(sum + c), v));
            _mm256_storeu_pd(sumsq + c, _mm256_fmadd_pd(v, v, _mm256_loadu_pd(sumsq + c)));
        }
        for (; c < d; ++c) {
            sum[c] += row[c];
            sumsq[c] += row[c] * row[c];
        }
    }
}

void normalize_cols_f64_avx2(const double* in, std::size_t n, std::size_t d,
                             const double* mean, const double* inv_std, double* out) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* src = in + r * d;
        double* dst = out + r * d;
        std::size_t c = 0;
        for (; c + 4 <= d; c += 4) {
            const __m256d v = _mm256_sub_pd(_mm256_loadu_pd(src + c), _mm256_loadu_pd(mean + c));
            _mm256_storeu_pd(dst + c, _mm256_mul_pd(v, _mm256_loadu_pd(inv_std + c)));
        }
        for (; c < d; ++c) dst[c] = (src[c] - mean[c]) * inv_std[c];
    }
}

void cross_corr_f64_avx2(const double* a, const double* b, std::size_t n,
                         std::size_t d, double* c) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* ar = a + r * d;
        const double* br = b + r * d;
        for (std::size_t i = 0; i < d; ++i) {
            const __m256d ai = _mm256_set1_pd(ar[i]);
            double* crow = c + i * d;
            std::size_t j = 0;
            for (; j + 4 <= d; j += 4) {
                const __m256d v = _mm256_fmadd_pd(ai, _mm256_loadu_pd(br + j),
                                                  _mm256_loadu_pd(crow + j));
                _mm256_storeu_pd(crow + j, v);
            }
            for (; j < d; ++j) crow[j] += ar[i] * br[j];
        }
    }
}

} // namespace

const Ops& avx2_ops() {
    static const Ops table{
        "avx2",
        sq_l2_f32_avx2,
        dot_f64_avx2,
        axpy_f64_avx2,
        col_moments_f64_avx2,
        normalize_cols_f64_avx2,
        cross_corr_f64_avx2,
    };
    return table;
}

} // namespace prl::kernels

#endif // __AVX2__ && __FMA__
