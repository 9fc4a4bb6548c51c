#pragma once

#include "ptc/predictors/mlp.hpp"
#include "ptc/solver/cholesky.hpp"

#include <algorithm>
#include <string_view>
#include <vector>

namespace ptc {

/// Covariates Z (T x d) and objective vectors C (T x n), one row per sample.
struct Dataset {
    Matrix Z;
    Matrix C;

    Index size() const { return Z.rows(); }
    Index covariate_dim() const { return Z.cols(); }
    Index objective_dim() const { return C.cols(); }

    void validate() const {
        require(Z.rows() == C.rows(), ErrorCode::DimensionMismatch, "dataset: Z and C row counts differ");
        require(Z.allFinite() && C.allFinite(), ErrorCode::ConfigInvalid, "dataset: non-finite entries");
    }

    Dataset rows(const std::vector<std::size_t>& idx) const {
        Dataset out{Matrix(static_cast<Index>(idx.size()), Z.cols()), Matrix(static_cast<Index>(idx.size()), C.cols())};
        for (std::size_t k = 0; k < idx.size(); ++k) {
            out.Z.row(static_cast<Index>(k)) = Z.row(static_cast<Index>(idx[k]));
            out.C.row(static_cast<Index>(k)) = C.row(static_cast<Index>(idx[k]));
        }
        return out;
    }
};

enum class PredictorKind { Linear, KernelRidgeRbf, Mlp };

inline std::string_view to_string(PredictorKind k) {
    switch (k) {
    case PredictorKind::Linear: return "linear";
    case PredictorKind::KernelRidgeRbf: return "kernel-ridge-rbf";
    case PredictorKind::Mlp: return "mlp";
    }
    return "?";
}

inline PredictorKind predictor_kind_from_string(std::string_view s) {
    if (s == "linear") return PredictorKind::Linear;
    if (s == "kernel-ridge-rbf" || s == "krr") return PredictorKind::KernelRidgeRbf;
    if (s == "mlp") return PredictorKind::Mlp;
    throw Error(ErrorCode::ConfigInvalid, "unknown predictor kind '" + std::string(s) + "'");
}

struct PredictorConfig {
    PredictorKind kind = PredictorKind::Linear;
    double ridge_lambda = 1e-3;
    /// RBF bandwidth; <= 0 selects the median pairwise-distance heuristic.
    double rbf_sigma = 0.0;
    MlpConfig mlp;
};

/// Point prediction model f: R^d -> R^n.
struct Predictor {
    PredictorKind kind = PredictorKind::Linear;
    Index input_dim = 0;
    Index output_dim = 0;

    // Linear: f(z) = intercept + weights' z, weights is d x n.
    Matrix weights;
    Vector intercept;

    // Kernel ridge: f(z) = offset + dual' k(z), k_t(z) = exp(-|z - z_t|^2 / (2 sigma^2)).
    Matrix support;  // T x d
    Matrix dual;     // T x n
    Vector offset;
    double sigma = 1.0;

    Mlp net;

    static Predictor linear(Matrix w, Vector b) {
        Predictor p;
        p.kind = PredictorKind::Linear;
        p.input_dim = w.rows();
        p.output_dim = w.cols();
        p.weights = std::move(w);
        p.intercept = std::move(b);
        return p;
    }

    static Predictor zero(Index d, Index n) { return linear(Matrix::Zero(d, n), Vector::Zero(n)); }

    static Predictor mlp(Mlp net) {
        Predictor p;
        p.kind = PredictorKind::Mlp;
        p.input_dim = net.input_dim();
        p.output_dim = net.output_dim();
        p.net = std::move(net);
        return p;
    }

    Vector predict(const Vector& z) const {
        require_dims(z.size(), input_dim, "predict: covariate length");
        switch (kind) {
        case PredictorKind::Linear:
            return intercept + weights.transpose() * z;
        case PredictorKind::KernelRidgeRbf: {
            const double inv = 1.0 / (2.0 * sigma * sigma);
            Vector k(support.rows());
            for (Index t = 0; t < support.rows(); ++t) {
                k(t) = std::exp(-(support.row(t).transpose() - z).squaredNorm() * inv);
            }
            return offset + dual.transpose() * k;
        }
        case PredictorKind::Mlp:
            return net.predict(z);
        }
        return {};
    }

    /// Row-wise predictions for a covariate matrix.
    Matrix predict_rows(const Matrix& Z) const {
        Matrix out(Z.rows(), output_dim);
        for (Index t = 0; t < Z.rows(); ++t) out.row(t) = predict(Z.row(t).transpose()).transpose();
        return out;
    }
};

/// Median pairwise Euclidean distance over (at most) the first 500 rows.
inline double median_pairwise_distance(const Matrix& Z) {
    const Index m = std::min<Index>(Z.rows(), 500);
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j) dist.push_back((Z.row(i) - Z.row(j)).norm());
    if (dist.empty()) return 1.0;
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    return *mid > 0.0 ? *mid : 1.0;
}

namespace detail {

inline Matrix solve_spd(const Matrix& a, const Matrix& rhs) {
    PsdFactor f;
    try {
        f = cholesky_jittered(a, 0.0);
    } catch (const Error&) {
        throw Error(ErrorCode::SingularSystem, "linear system is not positive definite");
    }
    auto solve = [&](const Matrix& r) -> Matrix {
        const Matrix y = f.lower.triangularView<Eigen::Lower>().solve(r);
        return f.lower.transpose().triangularView<Eigen::Upper>().solve(y);
    };
    // Iterative refinement recovers accuracy lost to ill-conditioning.
    Matrix x = solve(rhs);
    for (int it = 0; it < 3; ++it) x += solve(rhs - a * x);
    return x;
}

}  // namespace detail

/**
 * Fits f on (Z, C).
 *  - Linear: ridge with unpenalized intercept; (Zc'Zc + lambda I) W = Zc'Cc on centered data.
 *  - KernelRidgeRbf: dual = (K + lambda I)^{-1} (C - mean(C)).
 *  - Mlp: squared loss, seeded mini-batch Adam.
 */
inline Predictor fit_predictor(const Dataset& data, const PredictorConfig& config, std::uint64_t seed) {
    data.validate();
    require(data.size() >= 2, ErrorCode::TooFewSamples, "fit_predictor: need at least two samples");
    require(config.ridge_lambda >= 0.0, ErrorCode::ConfigInvalid, "fit_predictor: ridge lambda must be >= 0");

    const Index d = data.covariate_dim();
    const Index n = data.objective_dim();
    switch (config.kind) {
    case PredictorKind::Linear: {
        const Vector zmean = data.Z.colwise().mean().transpose();
        const Vector cmean = data.C.colwise().mean().transpose();
        const Matrix zc = data.Z.rowwise() - zmean.transpose();
        const Matrix cc = data.C.rowwise() - cmean.transpose();
        const Matrix gram = zc.transpose() * zc + config.ridge_lambda * Matrix::Identity(d, d);
        Matrix w = detail::solve_spd(gram, zc.transpose() * cc);
        Vector b = cmean - w.transpose() * zmean;
        return Predictor::linear(std::move(w), std::move(b));
    }
    case PredictorKind::KernelRidgeRbf: {
        Predictor p;
        p.kind = PredictorKind::KernelRidgeRbf;
        p.input_dim = d;
        p.output_dim = n;
        p.sigma = config.rbf_sigma > 0.0 ? config.rbf_sigma : median_pairwise_distance(data.Z);
        require(std::isfinite(p.sigma) && p.sigma > 0.0, ErrorCode::ConfigInvalid, "rbf bandwidth must be > 0");
        const Index T = data.size();
        const double inv = 1.0 / (2.0 * p.sigma * p.sigma);
        Matrix k(T, T);
        for (Index i = 0; i < T; ++i) {
            k(i, i) = 1.0 + config.ridge_lambda;
            for (Index j = 0; j < i; ++j) {
                const double v = std::exp(-(data.Z.row(i) - data.Z.row(j)).squaredNorm() * inv);
                k(i, j) = v;
                k(j, i) = v;
            }
        }
        p.offset = data.C.colwise().mean().transpose();
        p.support = data.Z;
        p.dual = detail::solve_spd(k, data.C.rowwise() - p.offset.transpose());
        return p;
    }
    case PredictorKind::Mlp:
        return Predictor::mlp(train_mlp(data.Z, data.C, Loss{LossKind::Squared, 0.5}, config.mlp, seed));
    }
    throw Error(ErrorCode::ConfigInvalid, "fit_predictor: unknown kind");
}

inline Vector predict(const Predictor& model, const Vector& z) { return model.predict(z); }

}  // namespace ptc
