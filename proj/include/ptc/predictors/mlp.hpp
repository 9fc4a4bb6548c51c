#pragma once

#include "ptc/common.hpp"
#include "ptc/rng.hpp"

#include <algorithm>
#include <vector>

namespace ptc {

enum class LossKind { Squared, Pinball };

/// Per-sample training loss. Pinball: alpha*u+ + (1-alpha)*(-u)+ with u = target - prediction.
struct Loss {
    LossKind kind = LossKind::Squared;
    double alpha = 0.5;

    double value(double target, double pred) const {
        const double u = target - pred;
        if (kind == LossKind::Squared) return 0.5 * u * u;
        return u > 0.0 ? alpha * u : (alpha - 1.0) * u;
    }
    /// d value / d pred
    double derivative(double target, double pred) const {
        const double u = target - pred;
        if (kind == LossKind::Squared) return -u;
        if (u > 0.0) return -alpha;
        if (u < 0.0) return 1.0 - alpha;
        return 0.0;
    }
};

struct DenseLayer {
    Matrix weight;  // out x in
    Vector bias;    // out
};

struct MlpConfig {
    std::vector<int> hidden = {64, 64};
    double learning_rate = 1e-3;
    int epochs = 200;
    int batch_size = 32;
};

/// Fully connected network with tanh hidden units and a linear output layer,
/// wrapped in fixed affine input/output scaling.
struct Mlp {
    std::vector<DenseLayer> layers;
    Vector input_shift;
    Vector input_scale;
    Vector output_shift;
    Vector output_scale;
    std::vector<double> epoch_loss;

    Index input_dim() const { return layers.front().weight.cols(); }
    Index output_dim() const { return layers.back().bias.size(); }

    /// Network without scaling, given explicit layers.
    static Mlp from_layers(std::vector<DenseLayer> layers) {
        Mlp net;
        net.layers = std::move(layers);
        const Index d = net.input_dim();
        const Index n = net.output_dim();
        net.input_shift = Vector::Zero(d);
        net.input_scale = Vector::Ones(d);
        net.output_shift = Vector::Zero(n);
        net.output_scale = Vector::Ones(n);
        return net;
    }

    /// Raw network output (scaled space) for a batch of scaled inputs (in x B).
    Matrix forward_scaled(const Matrix& x) const {
        Matrix a = x;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            Matrix z = layers[l].weight * a;
            z.colwise() += layers[l].bias;
            a = (l + 1 < layers.size()) ? Matrix(z.array().tanh()) : z;
        }
        return a;
    }

    Vector predict(const Vector& z) const {
        require_dims(z.size(), input_dim(), "mlp input");
        const Vector x = ((z - input_shift).array() / input_scale.array()).matrix();
        const Vector y = forward_scaled(x).col(0);
        return output_shift + output_scale.cwiseProduct(y);
    }
};

namespace detail {

struct MlpGradient {
    std::vector<DenseLayer> grads;
    double loss = 0.0;
};

// Mean loss over the batch columns and its gradient w.r.t. all parameters.
inline MlpGradient mlp_loss_gradient(const Mlp& net, const Matrix& x, const Matrix& y, const Loss& loss) {
    const std::size_t L = net.layers.size();
    const auto batch = static_cast<double>(x.cols());
    std::vector<Matrix> acts;
    acts.reserve(L + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < L; ++l) {
        Matrix z = net.layers[l].weight * acts.back();
        z.colwise() += net.layers[l].bias;
        acts.push_back(l + 1 < L ? Matrix(z.array().tanh()) : z);
    }
    const Matrix& out = acts.back();
    Matrix delta(out.rows(), out.cols());
    MlpGradient g;
    for (Index j = 0; j < out.cols(); ++j) {
        for (Index i = 0; i < out.rows(); ++i) {
            g.loss += loss.value(y(i, j), out(i, j));
            delta(i, j) = loss.derivative(y(i, j), out(i, j)) / batch;
        }
    }
    g.loss /= batch;
    g.grads.resize(L);
    for (std::size_t l = L; l-- > 0;) {
        g.grads[l].weight = delta * acts[l].transpose();
        g.grads[l].bias = delta.rowwise().sum();
        if (l > 0) {
            const Matrix back = net.layers[l].weight.transpose() * delta;
            delta = back.array() * (1.0 - acts[l].array().square());
        }
    }
    return g;
}

inline Vector column_quantile(const Matrix& y, Index col, double alpha) {
    std::vector<double> v(static_cast<std::size_t>(y.rows()));
    for (Index i = 0; i < y.rows(); ++i) v[static_cast<std::size_t>(i)] = y(i, col);
    std::sort(v.begin(), v.end());
    auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(v.size())));
    k = std::clamp<std::size_t>(k, 1, v.size());
    return Vector::Constant(1, v[k - 1]);
}

}  // namespace detail

/**
 * Trains an MLP on rows of (inputs, targets) with seeded mini-batch Adam.
 * Inputs are standardized and targets rescaled per column before training;
 * the output bias starts at the target mean (squared loss) or the empirical
 * alpha-quantile (pinball loss) in scaled units.
 */
inline Mlp train_mlp(const Matrix& inputs, const Matrix& targets, const Loss& loss, const MlpConfig& config,
                     std::uint64_t seed) {
    require(inputs.rows() == targets.rows(), ErrorCode::DimensionMismatch, "mlp: row counts differ");
    require(inputs.rows() >= 1, ErrorCode::TooFewSamples, "mlp: no training rows");
    require(config.learning_rate > 0.0 && config.epochs >= 0 && config.batch_size >= 1,
            ErrorCode::ConfigInvalid, "mlp: invalid optimizer settings");
    for (int h : config.hidden) require(h > 0, ErrorCode::ConfigInvalid, "mlp: layer sizes must be positive");

    const Index T = inputs.rows();
    const Index d = inputs.cols();
    const Index n = targets.cols();
    Mlp net;
    net.input_shift = inputs.colwise().mean().transpose();
    net.input_scale.resize(d);
    for (Index j = 0; j < d; ++j) {
        const double sd = std::sqrt((inputs.col(j).array() - net.input_shift(j)).square().mean());
        net.input_scale(j) = sd > 1e-12 ? sd : 1.0;
    }
    net.output_shift.resize(n);
    net.output_scale.resize(n);
    for (Index i = 0; i < n; ++i) {
        const double mean = targets.col(i).mean();
        const double sd = std::sqrt((targets.col(i).array() - mean).square().mean());
        // Pinball fits keep the origin so clamping at a positive floor stays meaningful.
        net.output_shift(i) = loss.kind == LossKind::Squared ? mean : 0.0;
        const double spread = loss.kind == LossKind::Squared ? sd : std::sqrt(targets.col(i).array().square().mean());
        net.output_scale(i) = spread > 1e-12 ? spread : 1.0;
    }
    Matrix x = inputs.transpose();
    for (Index j = 0; j < d; ++j) x.row(j) = (x.row(j).array() - net.input_shift(j)) / net.input_scale(j);
    Matrix y = targets.transpose();
    for (Index i = 0; i < n; ++i) y.row(i) = (y.row(i).array() - net.output_shift(i)) / net.output_scale(i);

    Rng rng = Rng::stream(seed, "mlp-init");
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(d));
    for (int h : config.hidden) sizes.push_back(h);
    sizes.push_back(static_cast<int>(n));
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        DenseLayer layer;
        const double bound = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
        layer.weight.resize(sizes[l + 1], sizes[l]);
        for (Index r = 0; r < layer.weight.rows(); ++r)
            for (Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
        layer.bias = Vector::Zero(sizes[l + 1]);
        net.layers.push_back(std::move(layer));
    }
    // Zero output layer: the untrained network is the best constant fit.
    net.layers.back().weight.setZero();
    const Matrix yt = y.transpose();
    for (Index i = 0; i < n; ++i) {
        net.layers.back().bias(i) =
            loss.kind == LossKind::Squared ? 0.0 : detail::column_quantile(yt, i, loss.alpha)(0);
    }

    // Adam state.
    std::vector<DenseLayer> m1 = net.layers;
    std::vector<DenseLayer> m2 = net.layers;
    for (auto& l : m1) {
        l.weight.setZero();
        l.bias.setZero();
    }
    for (auto& l : m2) {
        l.weight.setZero();
        l.bias.setZero();
    }
    const double beta1 = 0.9;
    const double beta2 = 0.999;
    const double eps = 1e-8;
    long step = 0;

    Rng shuffle = Rng::stream(seed, "mlp-shuffle");
    const auto batch = static_cast<Index>(config.batch_size);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = shuffle.permutation(static_cast<std::size_t>(T));
        double total = 0.0;
        for (Index start = 0; start < T; start += batch) {
            const Index count = std::min(batch, T - start);
            Matrix xb(d, count);
            Matrix yb(n, count);
            for (Index k = 0; k < count; ++k) {
                const auto row = static_cast<Index>(order[static_cast<std::size_t>(start + k)]);
                xb.col(k) = x.col(row);
                yb.col(k) = y.col(row);
            }
            const auto g = detail::mlp_loss_gradient(net, xb, yb, loss);
            total += g.loss * static_cast<double>(count);
            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                auto update = [&](auto& param, auto& mom1, auto& mom2, const auto& grad) {
                    mom1 = beta1 * mom1 + (1.0 - beta1) * grad;
                    mom2 = beta2 * mom2 + (1.0 - beta2) * grad.cwiseProduct(grad);
                    param.array() -= config.learning_rate * (mom1.array() / c1) /
                                     ((mom2.array() / c2).sqrt() + eps);
                };
                update(net.layers[l].weight, m1[l].weight, m2[l].weight, g.grads[l].weight);
                update(net.layers[l].bias, m1[l].bias, m2[l].bias, g.grads[l].bias);
            }
        }
        net.epoch_loss.push_back(total / static_cast<double>(T));
    }
    return net;
}

}  // namespace ptc
