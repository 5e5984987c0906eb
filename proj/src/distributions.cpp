#include "prl/distributions.hpp"

#include "prl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace prl::dist {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

// Lower incomplete gamma by power series, x < a + 1.
double gamma_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper incomplete gamma by modified Lentz continued fraction, x >= a + 1.
double gamma_cont_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double reg_lower_gamma(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw NumericError("reg_lower_gamma: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_cont_fraction(a, x);
}

double reg_upper_gamma(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw NumericError("reg_upper_gamma: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_cont_fraction(a, x);
}

double chi2_sf(double x, double df) {
    if (df <= 0.0) throw NumericError("chi2_sf: df must be positive");
    if (x <= 0.0) return 1.0;
    return reg_upper_gamma(0.5 * df, 0.5 * x);
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double norm_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_cont_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double reg_inc_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw NumericError("reg_inc_beta: bad shape");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cont_fraction(a, b, x) / a;
    return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw NumericError("student_t_two_sided_p: df must be positive");
    if (!std::isfinite(t)) return 0.0;
    const double x = df / (df + t * t);
    return reg_inc_beta(0.5 * df, 0.5, x);
}

long long hypergeom_support_min(long long N, long long K, long long n) {
    return std::max(0LL, n + K - N);
}

long long hypergeom_support_max(long long N, long long K, long long n) {
    return std::min(n, K);
}

namespace {

void check_hypergeom_args(long long N, long long K, long long n) {
    if (N < 0 || K < 0 || n < 0 || K > N || n > N)
        throw ValidationError("hypergeometric: impossible counts");
}

double log_binom(long long n, long long k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Binomial coefficients up to C(52, 26) are exactly representable in double;
// below that bound pmf values are computed from exact integer ratios.
constexpr long long kExactLimit = 52;

double exact_binom(long long n, long long k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double num = 1.0;
    double den = 1.0;
    for (long long i = 0; i < k; ++i) {
        num *= static_cast<double>(n - i);
        den *= static_cast<double>(i + 1);
    }
    return num / den;
}

} // namespace

double hypergeom_log_pmf(long long k, long long N, long long K, long long n) {
    check_hypergeom_args(N, K, n);
    if (k < hypergeom_support_min(N, K, n) || k > hypergeom_support_max(N, K, n))
        return -std::numeric_limits<double>::infinity();
    return log_binom(K, k) + log_binom(N - K, n - k) - log_binom(N, n);
}

double hypergeom_pmf(long long k, long long N, long long K, long long n) {
    check_hypergeom_args(N, K, n);
    if (k < hypergeom_support_min(N, K, n) || k > hypergeom_support_max(N, K, n))
        return 0.0;
    if (N <= kExactLimit)
        return exact_binom(K, k) * exact_binom(N - K, n - k) / exact_binom(N, n);
    return std::exp(hypergeom_log_pmf(k, N, K, n));
}

double hypergeom_cdf_lower(long long k, long long N, long long K, long long n) {
    check_hypergeom_args(N, K, n);
    const long long lo = hypergeom_support_min(N, K, n);
    const long long hi = hypergeom_support_max(N, K, n);
    if (k < lo) return 0.0;
    if (k >= hi) return 1.0;
    double acc = 0.0;
    for (long long i = lo; i <= k; ++i) acc += hypergeom_pmf(i, N, K, n);
    return std::min(acc, 1.0);
}

double hypergeom_cdf_upper(long long k, long long N, long long K, long long n) {
    check_hypergeom_args(N, K, n);
    const long long lo = hypergeom_support_min(N, K, n);
    const long long hi = hypergeom_support_max(N, K, n);
    if (k <= lo) return 1.0;
    if (k > hi) return 0.0;
    double acc = 0.0;
    for (long long i = k; i <= hi; ++i) acc += hypergeom_pmf(i, N, K, n);
    return std::min(acc, 1.0);
}

} // namespace prl::dist
