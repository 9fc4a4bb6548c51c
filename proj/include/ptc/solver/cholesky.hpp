#pragma once

#include "ptc/common.hpp"

namespace ptc {

/// Lower-triangular factor L of a positive definite matrix Q = L L'.
struct PsdFactor {
    Matrix lower;
    /// Diagonal shift that was added before factorizing.
    double jitter = 0.0;

    Index dim() const { return lower.rows(); }
    Matrix matrix() const { return lower * lower.transpose(); }

    static PsdFactor identity(Index n) { return PsdFactor{Matrix::Identity(n, n), 0.0}; }
};

namespace detail {

// Plain Cholesky-Banachiewicz; returns false on a non-positive pivot.
inline bool cholesky_in_place(const Matrix& q, double shift, Matrix& l) {
    const Index n = q.rows();
    l.setZero(n, n);
    for (Index j = 0; j < n; ++j) {
        double diag = q(j, j) + shift;
        for (Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > 0.0)) return false;
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (Index i = j + 1; i < n; ++i) {
            double s = q(i, j);
            for (Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return true;
}

}  // namespace detail

/**
 * Factorizes Q + lambda*I with lambda = jitter_rel * trace(Q)/n, multiplying
 * lambda by ten on breakdown until it reaches 1e-2 * trace(Q)/n. A zero trace
 * uses unit scale. With jitter_rel = 0 the first attempt is unshifted and the
 * escalation starts from 1e-10 * trace(Q)/n.
 */
inline PsdFactor cholesky_jittered(const Matrix& q, double jitter_rel = 1e-8) {
    require(q.rows() == q.cols(), ErrorCode::DimensionMismatch, "cholesky: matrix not square");
    require(q.allFinite(), ErrorCode::NotPsd, "cholesky: non-finite entries");
    const Index n = q.rows();
    require(n > 0, ErrorCode::DimensionMismatch, "cholesky: empty matrix");
    const double asym = (q - q.transpose()).cwiseAbs().maxCoeff();
    require(asym <= 1e-9 * std::max(1.0, q.cwiseAbs().maxCoeff()), ErrorCode::NotPsd,
            "cholesky: matrix not symmetric");

    double scale = q.trace() / static_cast<double>(n);
    if (!(scale > 0.0)) scale = 1.0;
    const double max_shift = 1e-2 * scale;

    PsdFactor out;
    double shift = jitter_rel * scale;
    for (;;) {
        if (detail::cholesky_in_place(q, shift, out.lower)) {
            out.jitter = shift;
            return out;
        }
        if (shift >= max_shift) break;
        shift = shift > 0.0 ? std::min(shift * 10.0, max_shift) : 1e-10 * scale;
    }
    throw Error(ErrorCode::NotPsd, "cholesky: factorization failed at maximum jitter");
}

/// sqrt(r' (L L')^{-1} r) via a forward substitution.
inline double mahalanobis(const Vector& r, const PsdFactor& factor) {
    require_dims(r.size(), factor.dim(), "mahalanobis: residual length");
    const Vector y = factor.lower.triangularView<Eigen::Lower>().solve(r);
    return y.norm();
}

}  // namespace ptc
