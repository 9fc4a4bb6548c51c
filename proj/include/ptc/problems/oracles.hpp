#pragma once

#include "ptc/common.hpp"

#include <cmath>

namespace ptc {

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
/// Series for x < a + 1, Lentz continued fraction for Q = 1 - P otherwise.
inline double regularized_gamma_p(double a, double x) {
    require(a > 0.0 && x >= 0.0, ErrorCode::DomainError, "regularized_gamma_p: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (!std::isfinite(x)) return 1.0;
    const double log_prefix = a * std::log(x) - x - std::lgamma(a);
    constexpr double eps = 1e-16;
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 10000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) break;
        }
        return std::min(1.0, sum * std::exp(log_prefix));
    }
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return std::max(0.0, 1.0 - std::exp(log_prefix) * h);
}

/**
 * P(x*_alpha(z_{1:k}) = 0) for c = sum_i z_i - d e with z_i, e ~ Exp(1) and
 * the predictor f_k = z_1 + ... + z_k:
 *   P(k, hi) - P(k, lo),
 *   hi = max(0, -d log((1 - alpha)(1 + 1/d)^(d-k))),
 *   lo = max(0, -d log(alpha (1 + 1/d)^(d-k))).
 */
inline double oracle_prob_zero(int k, int d, double alpha) {
    require(k >= 1 && k <= d, ErrorCode::DomainError, "oracle_prob_zero: need 1 <= k <= d");
    require(alpha > 0.5 && alpha < 1.0, ErrorCode::DomainError, "oracle_prob_zero: alpha must lie in (0.5, 1)");
    const double dd = d;
    const double tilt = (dd - k) * std::log1p(1.0 / dd);
    const double hi = std::max(0.0, -dd * (std::log1p(-alpha) + tilt));
    const double lo = std::max(0.0, -dd * (std::log(alpha) + tilt));
    return std::max(0.0, regularized_gamma_p(k, hi) - regularized_gamma_p(k, lo));
}

/// P(c <= 0 | f_k = f) = exp(-f/d) (1 + 1/d)^(k-d) under the same model.
inline double prob_nonpositive_given_f(double f, int k, int d) {
    return std::exp(-f / d + (k - d) * std::log1p(1.0 / d));
}

/// a = (1 - sqrt(2 - 2 alpha)) / 2, the offset of the half-line set.
inline double toy_set_offset(double alpha) { return 0.5 * (1.0 - std::sqrt(2.0 - 2.0 * alpha)); }

/// (3 - 2 alpha - 2 sqrt(2 - 2 alpha)) / 4, the edge of the zero region.
inline double toy_threshold(double alpha) {
    return 0.25 * (3.0 - 2.0 * alpha - 2.0 * std::sqrt(2.0 - 2.0 * alpha));
}

/// [bound, inf) when upward, (-inf, bound] otherwise.
struct HalfLine {
    double bound = 0.0;
    bool upward = true;

    bool contains(double c) const { return upward ? c >= bound : c <= bound; }
};

/// For z in [0, 1]: [sqrt z - a, inf); for z in [-1, 0): (-inf, -sqrt(-z) + a].
inline HalfLine oracle_toy_set(double z, double alpha) {
    require(alpha >= 0.5 && alpha < 1.0, ErrorCode::DomainError, "oracle_toy_set: alpha must lie in [0.5, 1)");
    require(z >= -1.0 && z <= 1.0, ErrorCode::DomainError, "oracle_toy_set: z must lie in [-1, 1]");
    const double a = toy_set_offset(alpha);
    if (z >= 0.0) return {std::sqrt(z) - a, true};
    return {-std::sqrt(-z) + a, false};
}

/// Robust decision under oracle_toy_set: -1 above the threshold, +1 below its mirror, 0 between.
inline int oracle_toy_solution(double z, double alpha) {
    require(alpha >= 0.5 && alpha < 1.0, ErrorCode::DomainError, "oracle_toy_solution: alpha must lie in [0.5, 1)");
    require(z >= -1.0 && z <= 1.0, ErrorCode::DomainError, "oracle_toy_solution: z must lie in [-1, 1]");
    const double t = toy_threshold(alpha);
    if (t <= 0.0) return z >= 0.0 ? -1 : 1;
    if (z > t) return -1;
    if (z < -t) return 1;
    return 0;
}

}  // namespace ptc
