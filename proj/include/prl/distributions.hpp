#pragma once

namespace prl::dist {

// Tail probabilities used by the model-fitting and enrichment modules.
// Incomplete gamma/beta are evaluated by series/continued fraction to
// machine precision; documented absolute accuracy is better than 1e-12
// over the ranges exercised here (verified in tests against high-precision
// references).

double reg_lower_gamma(double a, double x);   // P(a, x)
double reg_upper_gamma(double a, double x);   // Q(a, x)

double chi2_sf(double x, double df);          // upper tail
double norm_cdf(double z);
double norm_sf(double z);

double reg_inc_beta(double a, double b, double x);   // I_x(a, b)
double student_t_two_sided_p(double t, double df);

// Hypergeometric(N, K, n): number of successes in n draws without
// replacement from a population of N containing K successes.
long long hypergeom_support_min(long long N, long long K, long long n);
long long hypergeom_support_max(long long N, long long K, long long n);
double hypergeom_log_pmf(long long k, long long N, long long K, long long n);
double hypergeom_pmf(long long k, long long N, long long K, long long n);
double hypergeom_cdf_lower(long long k, long long N, long long K, long long n);  // P[X <= k]
double hypergeom_cdf_upper(long long k, long long N, long long K, long long n);  // P[X >= k]

} // namespace prl::dist
