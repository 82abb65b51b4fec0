#pragma once

// Tail probabilities for the reference distributions used in inference.
// Student-t and F tails go through the regularized incomplete beta function.

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "error.hpp"

namespace happyreg {

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal CDF via erfc, accurate in both tails.
inline double normal_cdf(double x) {
    if (std::isnan(x))
        throw DataError("normal_cdf: NaN argument");
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Upper tail 1 - Phi(x), computed without cancellation.
inline double normal_sf(double x) {
    if (std::isnan(x))
        throw DataError("normal_sf: NaN argument");
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DataError("normal_quantile: probability must lie in (0,1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

/// P(T > t) for Student-t with df degrees of freedom.
inline double t_distribution_sf(double t, double df) {
    if (!std::isfinite(t) || !std::isfinite(df))
        throw DataError("t_distribution_sf: non-finite input");
    if (df <= 0.0)
        throw DataError("t_distribution_sf: degrees of freedom must be positive");
    if (t == 0.0)
        return 0.5;
    const double x = df / (df + t * t);
    const double tail = 0.5 * boost::math::ibeta(0.5 * df, 0.5, x);
    return t > 0.0 ? tail : 1.0 - tail;
}

/// Two-sided p value 2 * P(T > |t|). An infinite statistic maps to 0.
inline double t_two_sided_p(double t, double df) {
    if (std::isinf(t))
        return 0.0;
    return 2.0 * t_distribution_sf(std::fabs(t), df);
}

/// P(F > f) for the F(d1, d2) distribution.
inline double f_distribution_sf(double f, double d1, double d2) {
    if (std::isnan(f) || !std::isfinite(d1) || !std::isfinite(d2))
        throw DataError("f_distribution_sf: non-finite input");
    if (d1 <= 0.0 || d2 <= 0.0)
        throw DataError("f_distribution_sf: degrees of freedom must be positive");
    if (std::isinf(f))
        return 0.0;
    if (f <= 0.0)
        return 1.0;
    return boost::math::ibeta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

} // namespace happyreg
