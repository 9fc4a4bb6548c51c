#pragma once

#include "ptc/calibrate/conformal.hpp"
#include "ptc/dro/kernel.hpp"

#include <numeric>

namespace ptc {

/// Smallest eta whose kernel-weighted mass of {||r|| <= eta} reaches alpha.
inline double weighted_radius(const Vector& norms, const Vector& weights, double alpha) {
    require_dims(weights.size(), norms.size(), "weighted_radius: weight length");
    std::vector<Index> order(static_cast<std::size_t>(norms.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return norms(a) < norms(b); });
    double mass = 0.0;
    double last = 0.0;
    for (Index t : order) {
        if (weights(t) <= 0.0) continue;
        mass += weights(t);
        last = norms(t);
        if (mass >= alpha - 1e-12) return norms(t);
    }
    return last;
}

/**
 * Individual-coverage set at z0: NormBall{f(z0), eta*} where eta* is the
 * weighted alpha-quantile of residual norms under the kernel weights
 * K((z_t - z0) / h). alpha = 1 selects the largest in-window norm.
 */
inline UncertaintySet individual_fit(const Predictor& f, const Matrix& Z, const Matrix& C, double alpha,
                                     const KernelSpec& kernel, double h, const Vector& z0) {
    require(alpha > 0.0 && alpha <= 1.0, ErrorCode::ConfigInvalid, "individual_fit: alpha must lie in (0,1]");
    const Vector w = kernel_weights(Z, z0, kernel, h);
    const Vector norms = residuals(f, Z, C).rowwise().norm();
    return UncertaintySet::norm_ball(f.predict(z0), weighted_radius(norms, w, alpha));
}

/// K draws f(z0) + r with r i.i.d. from the kernel-weighted residual distribution (K x n).
inline Matrix sample_conditional(const Predictor& f, const Matrix& Z, const Matrix& C, const KernelSpec& kernel,
                                 double h, const Vector& z0, Index count, std::uint64_t seed) {
    require(count >= 1, ErrorCode::ConfigInvalid, "sample_conditional: count must be >= 1");
    const Vector w = kernel_weights(Z, z0, kernel, h);
    const Matrix r = residuals(f, Z, C);
    const Vector fz = f.predict(z0);
    std::vector<double> cdf(static_cast<std::size_t>(w.size()));
    double acc = 0.0;
    for (Index t = 0; t < w.size(); ++t) cdf[static_cast<std::size_t>(t)] = acc += w(t);
    Index last = w.size() - 1;
    while (w(last) <= 0.0) --last;
    Rng rng = Rng::stream(seed, "sample-conditional");
    Matrix out(count, fz.size());
    for (Index k = 0; k < count; ++k) {
        const double u = rng.uniform01() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        Index t = std::min<Index>(static_cast<Index>(it - cdf.begin()), last);
        while (w(t) <= 0.0) ++t;
        out.row(k) = (fz + r.row(t).transpose()).transpose();
    }
    return out;
}

}  // namespace ptc
