#pragma once

#include "ptc/calibrate/uncertainty_set.hpp"
#include "ptc/problems/generators.hpp"

#include <algorithm>
#include <vector>

namespace ptc {

/// 1-based rank ceil(alpha m) clamped to [1, m]; the guard absorbs products like 0.7 * 10 = 7.000000000000001.
inline std::size_t order_statistic_rank(double alpha, std::size_t m) {
    require(m >= 1, ErrorCode::EmptyScores, "order statistic of an empty sample");
    const double k = std::ceil(alpha * static_cast<double>(m) - 1e-12);
    return static_cast<std::size_t>(std::clamp(k, 1.0, static_cast<double>(m)));
}

/// ceil(alpha m)-th smallest of the sampled costs (lower order statistic).
inline double estimate_var(std::vector<double> costs, double alpha) {
    require(!costs.empty(), ErrorCode::EmptyScores, "estimate_var: no sampled costs");
    require(alpha > 0.0 && alpha <= 1.0, ErrorCode::ConfigInvalid, "estimate_var: alpha must lie in (0,1]");
    const auto k = order_statistic_rank(alpha, costs.size()) - 1;
    std::nth_element(costs.begin(), costs.begin() + static_cast<std::ptrdiff_t>(k), costs.end());
    return costs[k];
}

/// VaR of x'c over the sampled cost rows (m x n).
inline double estimate_var(const Vector& x, const Matrix& samples, double alpha) {
    require_dims(samples.cols(), x.size(), "estimate_var: sample width");
    const Vector costs = samples * x;
    return estimate_var(std::vector<double>(costs.data(), costs.data() + costs.size()), alpha);
}

/// m conditional cost draws at z from the generator, then the VaR of x'c.
inline double estimate_var(const Vector& x, const Vector& z, const CostModel& model, double alpha, Index m,
                           Rng& rng) {
    require(m >= 1, ErrorCode::ConfigInvalid, "estimate_var: m must be >= 1");
    std::vector<double> costs(static_cast<std::size_t>(m));
    for (auto& v : costs) v = model.sample_cost(z, rng).dot(x);
    return estimate_var(std::move(costs), alpha);
}

/// Mean of 1{c_t in set_fn(z_t)} over the rows of (Z, C).
template <class SetFn>
double estimate_coverage(SetFn&& set_fn, const Matrix& Z, const Matrix& C) {
    require(Z.rows() == C.rows(), ErrorCode::DimensionMismatch, "estimate_coverage: row counts differ");
    require(C.rows() >= 1, ErrorCode::EmptyScores, "estimate_coverage: empty test set");
    Index hits = 0;
    for (Index t = 0; t < C.rows(); ++t) {
        const UncertaintySet set = set_fn(Vector(Z.row(t).transpose()));
        hits += set.contains(C.row(t).transpose());
    }
    return static_cast<double>(hits) / static_cast<double>(C.rows());
}

/// Fraction of sample rows inside one set.
inline double set_coverage(const UncertaintySet& set, const Matrix& samples) {
    require(samples.rows() >= 1, ErrorCode::EmptyScores, "set_coverage: no samples");
    Index hits = 0;
    for (Index t = 0; t < samples.rows(); ++t) hits += set.contains(samples.row(t).transpose());
    return static_cast<double>(hits) / static_cast<double>(samples.rows());
}

}  // namespace ptc
