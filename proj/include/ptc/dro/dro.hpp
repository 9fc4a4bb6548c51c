#pragma once

#include "ptc/calibrate/conformal.hpp"
#include "ptc/dro/kernel.hpp"
#include "ptc/robust/robust_lp.hpp"

namespace ptc {

struct DroConfig {
    /// Ambiguity radius; negative selects default_epsilon.
    double epsilon = -1.0;
    /// Kernel bandwidth; non-positive selects default_bandwidth(T, d, smoothness).
    double bandwidth = 0.0;
    double smoothness = 1.0;
};

/// r0 = sum_t w_t r_t.
inline Vector dro_center(const Matrix& residuals, const Vector& weights) {
    require_dims(weights.size(), residuals.rows(), "dro_center: weight length");
    return residuals.transpose() * weights;
}

/// h = T^(-1 / (2s + 2d)).
inline double default_bandwidth(Index T, Index d, double s = 1.0) {
    require(T >= 1 && d >= 1 && s > 0.0, ErrorCode::ConfigInvalid, "default_bandwidth: need T, d >= 1 and s > 0");
    return std::pow(static_cast<double>(T), -1.0 / (2.0 * s + 2.0 * static_cast<double>(d)));
}

/**
 * Heuristic radius r_bar * N^(-1/2) * log(T): r_bar is the weighted standard
 * deviation of residual norms, N the number of positively weighted samples.
 */
inline double default_epsilon(const Matrix& residuals, const Vector& weights, Index T) {
    const Vector norms = residuals.rowwise().norm();
    const double mean = norms.dot(weights);
    const double var = std::max(((norms.array() - mean).square() * weights.array()).sum(), 0.0);
    const auto active = static_cast<double>((weights.array() > 0.0).count());
    return std::sqrt(var) / std::sqrt(active) * std::log(std::max<double>(static_cast<double>(T), 1.0));
}

/// Ambiguity ball NormBall{f(z0) + r0, epsilon} with the configured or default parameters.
inline UncertaintySet dro_ball(const Predictor& f, const Matrix& Z, const Matrix& C, const Vector& z0,
                               const DroConfig& config, const KernelSpec& spec) {
    const double h = config.bandwidth > 0.0 ? config.bandwidth
                                            : default_bandwidth(Z.rows(), Z.cols(), config.smoothness);
    const Matrix r = residuals(f, Z, C);
    const Vector w = kernel_weights(Z, z0, spec, h);
    const double eps = config.epsilon >= 0.0 ? config.epsilon : default_epsilon(r, w, Z.rows());
    return UncertaintySet::norm_ball(f.predict(z0) + dro_center(r, w), eps);
}

/// min_x max_{||r - r0|| <= eps} (f(z0) + r)'x, i.e. the robust LP over the ambiguity ball.
inline RobustSolution solve_dro(const Predictor& f, const Matrix& Z, const Matrix& C, const Vector& z0,
                                const StandardForm& sf, const DroConfig& config, const KernelSpec& spec = {},
                                const FwOptions& fw = {}) {
    return solve_robust(dro_ball(f, Z, C, z0, config, spec), sf, fw);
}

inline RobustSolution solve_dro(const Predictor& f, const Matrix& Z, const Matrix& C, const Vector& z0,
                                const Constraints& cons, const DroConfig& config, const KernelSpec& spec = {},
                                const FwOptions& fw = {}) {
    return solve_dro(f, Z, C, z0, to_standard_form(cons), config, spec, fw);
}

}  // namespace ptc
