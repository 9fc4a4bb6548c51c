#pragma once

#include "ptc/predictors/mlp.hpp"

#include <string_view>

namespace ptc {

enum class QuantileKind { LinearPinball, MlpPinball };

inline std::string_view to_string(QuantileKind k) {
    return k == QuantileKind::LinearPinball ? "linear-pinball" : "mlp-pinball";
}

inline QuantileKind quantile_kind_from_string(std::string_view s) {
    if (s == "linear-pinball" || s == "linear") return QuantileKind::LinearPinball;
    if (s == "mlp-pinball" || s == "mlp") return QuantileKind::MlpPinball;
    throw Error(ErrorCode::ConfigInvalid, "unknown quantile model kind '" + std::string(s) + "'");
}

struct QuantileConfig {
    QuantileKind kind = QuantileKind::LinearPinball;
    double floor = 1e-6;
    /// Predictions are clamped at max(floor, floor_rel * mean |target|).
    double floor_rel = 1e-2;
    // Linear: full-batch subgradient descent, step learning_rate / sqrt(t + 1),
    // iterate averaged over the second half of the run.
    int linear_iterations = 3000;
    double linear_learning_rate = 0.5;
    MlpConfig mlp;
};

/// Conditional alpha-quantile regressor with predictions clamped to >= floor.
struct QuantileModel {
    QuantileKind kind = QuantileKind::LinearPinball;
    double alpha = 0.5;
    double floor = 1e-6;
    Index input_dim = 0;
    Index output_dim = 0;

    // Linear: q(z) = intercept + weights' ((z - shift) / scale)
    Vector input_shift;
    Vector input_scale;
    Matrix weights;  // d x k
    Vector intercept;

    Mlp net;

    Vector predict(const Vector& z) const {
        require_dims(z.size(), input_dim, "quantile predict: covariate length");
        Vector raw;
        if (kind == QuantileKind::LinearPinball) {
            const Vector x = ((z - input_shift).array() / input_scale.array()).matrix();
            raw = intercept + weights.transpose() * x;
        } else {
            raw = net.predict(z);
        }
        return raw.cwiseMax(floor);
    }

    /// Constant model q(z) = value for every z (dimension d in, k out).
    static QuantileModel constant(Index d, const Vector& value, double alpha, double floor = 1e-6) {
        QuantileModel q;
        q.kind = QuantileKind::LinearPinball;
        q.alpha = alpha;
        q.floor = floor;
        q.input_dim = d;
        q.output_dim = value.size();
        q.input_shift = Vector::Zero(d);
        q.input_scale = Vector::Ones(d);
        q.weights = Matrix::Zero(d, value.size());
        q.intercept = value;
        return q;
    }
};

/// Mean pinball loss alpha*u+ + (1-alpha)*(-u)+ of predictions against targets.
inline double pinball_loss(const Matrix& targets, const Matrix& preds, double alpha) {
    const Loss loss{LossKind::Pinball, alpha};
    double total = 0.0;
    for (Index i = 0; i < targets.rows(); ++i)
        for (Index j = 0; j < targets.cols(); ++j) total += loss.value(targets(i, j), preds(i, j));
    return total / static_cast<double>(targets.size());
}

/**
 * Fits an alpha-quantile model of each target column by minimizing the pinball
 * loss. Both model kinds start from the empirical alpha-quantile of each
 * column (the exact minimizer for a constant model).
 */
inline QuantileModel fit_quantile(const Matrix& Z, const Matrix& targets, double alpha, const QuantileConfig& config,
                                  std::uint64_t seed) {
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::ConfigInvalid, "fit_quantile: alpha must lie in (0,1)");
    require(Z.rows() == targets.rows(), ErrorCode::DimensionMismatch, "fit_quantile: row counts differ");
    require(Z.rows() >= 1, ErrorCode::TooFewSamples, "fit_quantile: no rows");
    require(targets.allFinite() && Z.allFinite(), ErrorCode::ConfigInvalid, "fit_quantile: non-finite data");
    require(config.floor > 0.0, ErrorCode::ConfigInvalid, "fit_quantile: floor must be positive");
    require(config.floor_rel >= 0.0, ErrorCode::ConfigInvalid, "fit_quantile: floor_rel must be >= 0");

    const Index T = Z.rows();
    const Index d = Z.cols();
    const Index k = targets.cols();
    QuantileModel q;
    q.kind = config.kind;
    q.alpha = alpha;
    q.floor = std::max(config.floor, config.floor_rel * targets.cwiseAbs().mean());
    q.input_dim = d;
    q.output_dim = k;

    if (config.kind == QuantileKind::MlpPinball) {
        q.net = train_mlp(Z, targets, Loss{LossKind::Pinball, alpha}, config.mlp, seed);
        return q;
    }

    require(config.linear_iterations >= 0 && config.linear_learning_rate > 0.0, ErrorCode::ConfigInvalid,
            "fit_quantile: invalid subgradient settings");
    q.input_shift = Z.colwise().mean().transpose();
    q.input_scale.resize(d);
    for (Index j = 0; j < d; ++j) {
        const double sd = std::sqrt((Z.col(j).array() - q.input_shift(j)).square().mean());
        q.input_scale(j) = sd > 1e-12 ? sd : 1.0;
    }
    Matrix x = Z.rowwise() - q.input_shift.transpose();
    for (Index j = 0; j < d; ++j) x.col(j) /= q.input_scale(j);

    q.weights = Matrix::Zero(d, k);
    q.intercept.resize(k);
    for (Index c = 0; c < k; ++c) {
        const double scale = std::max(std::sqrt(targets.col(c).array().square().mean()), 1e-12);
        double b = detail::column_quantile(targets, c, alpha)(0) / scale;
        Vector w = Vector::Zero(d);
        const Vector y = targets.col(c) / scale;
        Vector w_avg = Vector::Zero(d);
        double b_avg = 0.0;
        int averaged = 0;
        const int half = config.linear_iterations / 2;
        for (int it = 0; it < config.linear_iterations; ++it) {
            const Vector pred = (x * w).array() + b;
            Vector gw = Vector::Zero(d);
            double gb = 0.0;
            for (Index t = 0; t < T; ++t) {
                const double u = y(t) - pred(t);
                const double g = u > 0.0 ? -alpha : (u < 0.0 ? 1.0 - alpha : 0.0);
                gw += g * x.row(t).transpose();
                gb += g;
            }
            const double step = config.linear_learning_rate / std::sqrt(static_cast<double>(it) + 1.0);
            w -= step * gw / static_cast<double>(T);
            b -= step * gb / static_cast<double>(T);
            if (it >= half) {
                w_avg += w;
                b_avg += b;
                ++averaged;
            }
        }
        if (averaged > 0) {
            w = w_avg / averaged;
            b = b_avg / averaged;
        }
        q.weights.col(c) = w * scale;
        q.intercept(c) = b * scale;
    }
    return q;
}

}  // namespace ptc
