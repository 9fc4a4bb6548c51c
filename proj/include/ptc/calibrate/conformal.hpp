#pragma once

#include "ptc/calibrate/uncertainty_set.hpp"
#include "ptc/predictors/predictor.hpp"
#include "ptc/predictors/quantile.hpp"

#include <algorithm>
#include <memory>
#include <vector>

namespace ptc {

struct SplitIndices {
    std::vector<std::size_t> d1;
    std::vector<std::size_t> d2;
};

/// Seeded permutation of 0..T-1; the first ceil(ratio*T) indices form D1.
inline SplitIndices split_validation(std::size_t T, double ratio, std::uint64_t seed) {
    require(T >= 4, ErrorCode::TooFewSamples, "split_validation: need at least 4 samples");
    require(ratio > 0.0 && ratio < 1.0, ErrorCode::ConfigInvalid, "split_validation: ratio must lie in (0,1)");
    Rng rng = Rng::stream(seed, "split-validation");
    const auto perm = rng.permutation(T);
    auto cut = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(T)));
    cut = std::clamp<std::size_t>(cut, 1, T - 1);
    SplitIndices s;
    s.d1.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cut));
    s.d2.assign(perm.begin() + static_cast<std::ptrdiff_t>(cut), perm.end());
    return s;
}

/// Row t is c_t - f(z_t).
inline Matrix residuals(const Predictor& f, const Matrix& Z, const Matrix& C) {
    require(Z.rows() == C.rows(), ErrorCode::DimensionMismatch, "residuals: row counts differ");
    require_dims(Z.cols(), f.input_dim, "residuals: covariate width");
    require_dims(C.cols(), f.output_dim, "residuals: objective width");
    return C - f.predict_rows(Z);
}

/// k-th smallest score, k = min(|D2|, ceil(alpha (|D2| + 1))). May be +inf.
inline double conformal_eta(std::vector<double> scores, double alpha) {
    require(!scores.empty(), ErrorCode::EmptyScores, "conformal_eta: no scores");
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::ConfigInvalid, "conformal_eta: alpha must lie in (0,1)");
    const std::size_t m = scores.size();
    auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(m + 1) - 1e-12));
    k = std::clamp<std::size_t>(k, 1, m);
    std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(k - 1), scores.end());
    return scores[k - 1];
}

/// Minimal eta with f - eta h <= c <= f + eta h componentwise.
inline double box_score(const Vector& r, const Vector& h) {
    double s = 0.0;
    for (Index i = 0; i < r.size(); ++i) s = std::max(s, std::abs(r(i)) / h(i));
    return s;
}

namespace detail {

inline Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(static_cast<Index>(idx.size()), m.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Index>(k)) = m.row(static_cast<Index>(idx[k]));
    return out;
}

}  // namespace detail

/**
 * Shared state of a split-conformal calibration: the D2 scores are kept so the
 * scale can be recomputed for another level with the same fitted regressors.
 * When the required order statistic is +inf the set falls back to the
 * observed residual range f(z) + [min r, max r].
 */
struct ConformalState {
    std::shared_ptr<const Predictor> predictor;
    double alpha = 0.5;
    double eta = 0.0;
    std::vector<double> scores;
    Vector residual_min;
    Vector residual_max;

    bool infinite_eta() const { return !std::isfinite(eta); }

    UncertaintySet fallback_at(const Vector& fz) const {
        return UncertaintySet::box(fz + residual_min, fz + residual_max);
    }

    void set_alpha(double a) {
        alpha = a;
        eta = conformal_eta(scores, a);
    }
};

struct BoxCalibration : ConformalState {
    QuantileModel h;

    UncertaintySet set_at(const Vector& z) const {
        const Vector fz = predictor->predict(z);
        if (infinite_eta()) return fallback_at(fz);
        const Vector half = eta * h.predict(z);
        return UncertaintySet::box(fz - half, fz + half);
    }

    double score(const Vector& z, const Vector& c) const {
        return box_score(c - predictor->predict(z), h.predict(z));
    }

    BoxCalibration with_alpha(double a) const {
        BoxCalibration out = *this;
        out.set_alpha(a);
        return out;
    }
};

struct EllipsoidCalibration : ConformalState {
    QuantileModel g;
    PsdFactor sigma;

    UncertaintySet set_at(const Vector& z) const {
        const Vector fz = predictor->predict(z);
        if (infinite_eta()) return fallback_at(fz);
        return UncertaintySet::ellipsoid(fz, sigma, eta * g.predict(z)(0));
    }

    double score(const Vector& z, const Vector& c) const {
        return mahalanobis(c - predictor->predict(z), sigma) / g.predict(z)(0);
    }

    EllipsoidCalibration with_alpha(double a) const {
        EllipsoidCalibration out = *this;
        out.set_alpha(a);
        return out;
    }
};

namespace detail {

inline void init_state(ConformalState& s, std::shared_ptr<const Predictor> f, const Matrix& r, double alpha) {
    s.predictor = std::move(f);
    s.alpha = alpha;
    s.residual_min = r.colwise().minCoeff().transpose();
    s.residual_max = r.colwise().maxCoeff().transpose();
}

inline void check_calibration_inputs(const Predictor& f, const Matrix& Z, const Matrix& C, double alpha) {
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::ConfigInvalid, "calibration: alpha must lie in (0,1)");
    require(Z.rows() == C.rows(), ErrorCode::DimensionMismatch, "calibration: row counts differ");
    require_dims(C.cols(), f.output_dim, "calibration: objective width");
}

}  // namespace detail

/**
 * Box calibration: h is an alpha-quantile regressor of |r| fitted on D1; the
 * D2 scores max_i |r_ti| / h(z_t)_i set eta by the conformal order statistic.
 */
inline BoxCalibration buq_fit(std::shared_ptr<const Predictor> f, const Matrix& Z, const Matrix& C, double alpha,
                              double split_ratio, const QuantileConfig& qcfg, std::uint64_t seed) {
    detail::check_calibration_inputs(*f, Z, C, alpha);
    const auto split = split_validation(static_cast<std::size_t>(Z.rows()), split_ratio, seed);
    const Matrix r = residuals(*f, Z, C);
    BoxCalibration cal;
    detail::init_state(cal, std::move(f), r, alpha);
    cal.h = fit_quantile(detail::take_rows(Z, split.d1), detail::take_rows(r, split.d1).cwiseAbs(), alpha, qcfg,
                         derive_seed(seed, "buq-quantile"));
    for (std::size_t t : split.d2) {
        const auto row = static_cast<Index>(t);
        cal.scores.push_back(box_score(r.row(row).transpose(), cal.h.predict(Z.row(row).transpose())));
    }
    cal.eta = conformal_eta(cal.scores, alpha);
    return cal;
}

inline BoxCalibration buq_fit(const Predictor& f, const Matrix& Z, const Matrix& C, double alpha, double split_ratio,
                              const QuantileConfig& qcfg, std::uint64_t seed) {
    return buq_fit(std::make_shared<const Predictor>(f), Z, C, alpha, split_ratio, qcfg, seed);
}

/**
 * Ellipsoid calibration: scalar g is an alpha-quantile regressor of ||r||_2 on
 * D1, Sigma the second moment of r_t / g(z_t) over D1 (zero-mean normal fit);
 * D2 scores mahalanobis(r_t) / g(z_t) set eta.
 */
inline EllipsoidCalibration euq_fit(std::shared_ptr<const Predictor> f, const Matrix& Z, const Matrix& C,
                                    double alpha, double split_ratio, const QuantileConfig& qcfg,
                                    std::uint64_t seed) {
    detail::check_calibration_inputs(*f, Z, C, alpha);
    require(C.cols() >= 1, ErrorCode::DimensionMismatch, "euq_fit: objective dimension must be >= 1");
    const auto split = split_validation(static_cast<std::size_t>(Z.rows()), split_ratio, seed);
    const Matrix r = residuals(*f, Z, C);
    EllipsoidCalibration cal;
    detail::init_state(cal, std::move(f), r, alpha);

    const Matrix z1 = detail::take_rows(Z, split.d1);
    const Matrix r1 = detail::take_rows(r, split.d1);
    cal.g = fit_quantile(z1, r1.rowwise().norm(), alpha, qcfg, derive_seed(seed, "euq-quantile"));
    const Index n = r.cols();
    Matrix sigma = Matrix::Zero(n, n);
    for (Index t = 0; t < r1.rows(); ++t) {
        const Vector s = r1.row(t).transpose() / cal.g.predict(z1.row(t).transpose())(0);
        sigma.noalias() += s * s.transpose();
    }
    sigma /= static_cast<double>(r1.rows());
    cal.sigma = cholesky_jittered(sigma);
    for (std::size_t t : split.d2) {
        const auto row = static_cast<Index>(t);
        cal.scores.push_back(mahalanobis(r.row(row).transpose(), cal.sigma) /
                             cal.g.predict(Z.row(row).transpose())(0));
    }
    cal.eta = conformal_eta(cal.scores, alpha);
    return cal;
}

inline EllipsoidCalibration euq_fit(const Predictor& f, const Matrix& Z, const Matrix& C, double alpha,
                                    double split_ratio, const QuantileConfig& qcfg, std::uint64_t seed) {
    return euq_fit(std::make_shared<const Predictor>(f), Z, C, alpha, split_ratio, qcfg, seed);
}

inline UncertaintySet set_at(const BoxCalibration& cal, const Vector& z) { return cal.set_at(z); }
inline UncertaintySet set_at(const EllipsoidCalibration& cal, const Vector& z) { return cal.set_at(z); }

}  // namespace ptc
