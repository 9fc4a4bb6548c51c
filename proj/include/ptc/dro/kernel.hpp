#pragma once

#include "ptc/common.hpp"

#include <string_view>

namespace ptc {

enum class KernelKind { UniformBox, TruncatedGaussian };

inline std::string_view to_string(KernelKind k) {
    return k == KernelKind::UniformBox ? "uniform-box" : "truncated-gaussian";
}

/**
 * Kernel with bounded support {u : max_i |u_i| <= R}.
 *   UniformBox:        K(u) = 1
 *   TruncatedGaussian: K(u) = exp(-|u|^2 / 2)
 * inside the support, 0 outside. lower_bound/upper_bound are the density
 * bounds b_r, b_R; they are informational and never enter a computation.
 */
struct KernelSpec {
    KernelKind kind = KernelKind::UniformBox;
    double support_radius = 1.0;

    double operator()(const Vector& u) const {
        if (u.cwiseAbs().maxCoeff() > support_radius) return 0.0;
        return kind == KernelKind::UniformBox ? 1.0 : std::exp(-0.5 * u.squaredNorm());
    }

    double upper_bound() const { return 1.0; }

    double lower_bound(Index d) const {
        if (kind == KernelKind::UniformBox) return 1.0;
        return std::exp(-0.5 * static_cast<double>(d) * support_radius * support_radius);
    }
};

/// Normalized weights w_t proportional to K((z_t - z0) / h).
inline Vector kernel_weights(const Matrix& Z, const Vector& z0, const KernelSpec& spec, double h) {
    require(h > 0.0 && std::isfinite(h), ErrorCode::ConfigInvalid, "kernel_weights: bandwidth must be > 0");
    require(spec.support_radius > 0.0, ErrorCode::ConfigInvalid, "kernel_weights: support radius must be > 0");
    require_dims(z0.size(), Z.cols(), "kernel_weights: covariate length");
    Vector w(Z.rows());
    for (Index t = 0; t < Z.rows(); ++t) w(t) = spec((Z.row(t).transpose() - z0) / h);
    const double total = w.sum();
    require(total > 0.0, ErrorCode::NoNeighbors, "kernel_weights: no sample inside the kernel window");
    return w / total;
}

}  // namespace ptc
