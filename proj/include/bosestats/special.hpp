#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "bosestats/errors.hpp"

namespace bosestats {

namespace special_detail {

/// Series expansion of the regularized lower incomplete gamma P(a, x),
/// valid for x < a + 1.
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Continued fraction (modified Lentz) for the regularized upper incomplete
/// gamma Q(a, x), valid for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace special_detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0)) throw ValidationError("gamma_p: shape must be positive");
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return special_detail::gamma_p_series(a, x);
    return 1.0 - special_detail::gamma_q_cf(a, x);
}

/// Chi-square CDF with k degrees of freedom.
inline double chi2_cdf(double x, double dof) { return gamma_p(0.5 * dof, 0.5 * x); }

/// Chi-square quantile by bracketing bisection on the CDF.
inline double chi2_quantile(double p, double dof) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("chi2_quantile: p must be in (0,1)");
    if (!(dof > 0.0)) throw ValidationError("chi2_quantile: dof must be positive");
    double lo = 0.0;
    double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 50.0;
    while (chi2_cdf(hi, dof) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_cdf(mid, dof) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-13 * hi) break;
    }
    return 0.5 * (lo + hi);
}

/// Poisson probability mass at integer k for mean lambda.
inline double poisson_pmf(std::uint64_t k, double lambda) {
    if (lambda <= 0.0) return k == 0 ? 1.0 : 0.0;
    const double kf = static_cast<double>(k);
    return std::exp(kf * std::log(lambda) - lambda - std::lgamma(kf + 1.0));
}

} // namespace bosestats
