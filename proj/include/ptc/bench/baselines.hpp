#pragma once

#include "ptc/bench/metrics.hpp"
#include "ptc/solver/cholesky.hpp"

#include <numeric>

namespace ptc {

namespace detail {

struct GaussianFit {
    Vector mean;
    PsdFactor factor;
};

/// Sample mean and jittered Cholesky of the (T - 1)-denominator covariance.
inline GaussianFit gaussian_fit(const Matrix& C) {
    require(C.rows() >= 2, ErrorCode::TooFewSamples, "gaussian fit: need at least two samples");
    GaussianFit g;
    g.mean = C.colwise().mean().transpose();
    const Matrix centered = C.rowwise() - g.mean.transpose();
    g.factor = cholesky_jittered(centered.transpose() * centered / static_cast<double>(C.rows() - 1));
    return g;
}

inline std::vector<double> mahalanobis_rows(const Matrix& C, const GaussianFit& g) {
    std::vector<double> d(static_cast<std::size_t>(C.rows()));
    for (Index t = 0; t < C.rows(); ++t) d[static_cast<std::size_t>(t)] = mahalanobis(C.row(t).transpose() - g.mean, g.factor);
    return d;
}

}  // namespace detail

/// Context-free ellipsoid: Gaussian fit of C, radius the ceil(alpha T)-th smallest training distance.
inline UncertaintySet baseline_ellipsoid(const Matrix& C, double alpha) {
    require(C.rows() >= C.cols() + 1, ErrorCode::TooFewSamples, "baseline_ellipsoid: need at least n + 1 samples");
    require(alpha > 0.0 && alpha <= 1.0, ErrorCode::ConfigInvalid, "baseline_ellipsoid: alpha must lie in (0,1]");
    auto g = detail::gaussian_fit(C);
    auto dist = detail::mahalanobis_rows(C, g);
    const auto k = order_statistic_rank(alpha, dist.size()) - 1;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    return UncertaintySet::ellipsoid(std::move(g.mean), std::move(g.factor), dist[k]);
}

/// k = max(ceil(sqrt T), 2n).
inline Index knn_size(Index T, Index n) {
    return std::max(static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(T)))), 2 * n);
}

/// Indices of the k training rows closest to z0 in Euclidean distance; ties go to the lower index.
inline std::vector<Index> nearest_rows(const Matrix& Z, const Vector& z0, Index k) {
    require_dims(z0.size(), Z.cols(), "nearest_rows: covariate length");
    require(k >= 1 && k <= Z.rows(), ErrorCode::TooFewSamples, "nearest_rows: need 1 <= k <= T");
    const Vector dist = (Z.rowwise() - z0.transpose()).rowwise().squaredNorm();
    std::vector<Index> order(static_cast<std::size_t>(Z.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
        return dist(a) < dist(b) || (dist(a) == dist(b) && a < b);
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

/**
 * kNN ellipsoid at z0: Gaussian fit of the k nearest neighbours' costs with the
 * radius enclosing all of them. alpha does not enter the set.
 */
inline UncertaintySet baseline_knn(const Matrix& Z, const Matrix& C, [[maybe_unused]] double alpha, const Vector& z0,
                                   Index k = 0) {
    require(Z.rows() == C.rows(), ErrorCode::DimensionMismatch, "baseline_knn: row counts differ");
    if (k <= 0) k = knn_size(Z.rows(), C.cols());
    require(Z.rows() >= k, ErrorCode::TooFewSamples, "baseline_knn: need T >= k");
    const auto idx = nearest_rows(Z, z0, k);
    Matrix local(k, C.cols());
    for (Index i = 0; i < k; ++i) local.row(i) = C.row(idx[static_cast<std::size_t>(i)]);
    auto g = detail::gaussian_fit(local);
    const auto dist = detail::mahalanobis_rows(local, g);
    const double radius = *std::max_element(dist.begin(), dist.end());
    return UncertaintySet::ellipsoid(std::move(g.mean), std::move(g.factor), radius);
}

}  // namespace ptc
