#pragma once

#include "ptc/solver/cholesky.hpp"
#include "ptc/solver/simplex.hpp"

#include <algorithm>
#include <vector>

namespace ptc {

struct FwOptions {
    /// Stop once the duality gap is <= gap_tol * max(1, |objective|).
    double gap_tol = 1e-6;
    /// Cap on linear-oracle calls.
    int max_iter = 5000;
    /// Cap on inner pairwise steps between two oracle calls.
    int max_inner = 2000;
    /// delta = smoothing_rel * trace(G'G) / n inside the square root.
    double smoothing_rel = 1e-9;
};

namespace detail {

// Minimizer over [0, tmax] of a*t + w*sqrt(q0 + 2*q1*t + q2*t^2), a convex
// function of t; bisection on the derivative.
inline double norm_line_search(double a, double w, double q0, double q1, double q2, double tmax) {
    auto deriv = [&](double t) {
        const double q = std::max(q0 + 2.0 * q1 * t + q2 * t * t, 1e-300);
        return a + w * (q1 + q2 * t) / std::sqrt(q);
    };
    if (deriv(0.0) >= 0.0) return 0.0;
    if (deriv(tmax) <= 0.0) return tmax;
    double lo = 0.0;
    double hi = tmax;
    for (int i = 0; i < 100 && hi - lo > 1e-16 * tmax; ++i) {
        const double mid = 0.5 * (lo + hi);
        (deriv(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/**
 * Conditional-gradient solver for
 *
 *     min  c'x + weight * ||G x||   s.t.  Ax = b, x >= 0
 *
 * on a bounded polytope, with the norm smoothed to sqrt(||Gx||^2 + delta).
 *
 * `oracle(g)` must return an LpSolution minimizing g'x over the same polytope.
 * Each outer step queries the oracle at the current gradient; the duality gap
 * g'(x - s) certifies suboptimality of the smoothed objective. Between oracle
 * calls the iterate is re-optimized over the convex hull of the vertices found
 * so far (fully corrective variant, pairwise steps with exact line search),
 * which keeps the number of LP solves small.
 */
template <typename LinearOracle>
LpSolution minimize_lin_plus_norm(const Vector& c, const Matrix& norm_map, double weight,
                                  LinearOracle&& oracle, const FwOptions& opts = {}) {
    const Index n = c.size();
    require_dims(norm_map.cols(), n, "lin_plus_norm: norm map columns");
    require(weight >= 0.0 && std::isfinite(weight), ErrorCode::ConfigInvalid,
            "lin_plus_norm: weight must be finite and non-negative");

    LpSolution first = oracle(c);
    if (weight == 0.0 || !first.optimal()) return first;

    const double delta =
        opts.smoothing_rel * norm_map.squaredNorm() / static_cast<double>(std::max<Index>(n, 1));

    std::vector<Vector> verts;
    std::vector<Vector> gverts;
    std::vector<double> cverts;
    std::vector<double> lambda;
    auto add_vertex = [&](const Vector& v) {
        for (std::size_t i = 0; i < verts.size(); ++i) {
            if ((verts[i] - v).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff())) {
                return i;
            }
        }
        verts.push_back(v);
        gverts.push_back(norm_map * v);
        cverts.push_back(c.dot(v));
        lambda.push_back(0.0);
        return verts.size() - 1;
    };
    add_vertex(first.x);
    lambda[0] = 1.0;

    Vector x = first.x;
    Vector u = gverts[0];
    auto recompute = [&] {
        x.setZero();
        u.setZero(norm_map.rows());
        for (std::size_t i = 0; i < verts.size(); ++i) {
            if (lambda[i] == 0.0) continue;
            x += lambda[i] * verts[i];
            u += lambda[i] * gverts[i];
        }
    };

    LpSolution out;
    out.status = LpStatus::NotConverged;
    double inner_tol = 0.5 * opts.gap_tol;
    int calls = 1;

    for (;;) {
        // Inner pairwise steps over the active vertex hull.
        for (int it = 0; it < opts.max_inner; ++it) {
            const double s = std::sqrt(u.squaredNorm() + delta);
            std::size_t fw = 0;
            std::size_t away = verts.size();
            double best = kInf;
            double worst = -kInf;
            for (std::size_t i = 0; i < verts.size(); ++i) {
                const double score = cverts[i] + weight * gverts[i].dot(u) / s;
                if (score < best) {
                    best = score;
                    fw = i;
                }
                if (lambda[i] > 0.0 && score > worst) {
                    worst = score;
                    away = i;
                }
            }
            if (away == verts.size() || worst - best <= inner_tol || fw == away) break;
            const Vector gd = gverts[fw] - gverts[away];
            const double a = cverts[fw] - cverts[away];
            const double q0 = u.squaredNorm() + delta;
            const double t =
                detail::norm_line_search(a, weight, q0, u.dot(gd), gd.squaredNorm(), lambda[away]);
            if (t <= 0.0) break;
            if (t >= lambda[away]) {
                lambda[fw] += lambda[away];
                lambda[away] = 0.0;
            } else {
                lambda[fw] += t;
                lambda[away] -= t;
            }
            recompute();
        }

        // Outer oracle step and gap certificate.
        const double s = std::sqrt(u.squaredNorm() + delta);
        const Vector grad = c + (weight / s) * (norm_map.transpose() * u);
        LpSolution lmo = oracle(grad);
        ++calls;
        if (!lmo.optimal()) {
            lmo.x = x;
            return lmo;
        }
        const double gap = grad.dot(x - lmo.x);
        out.x = x;
        out.gap = std::max(gap, 0.0);
        out.iterations = calls;
        const double level = c.dot(x) + weight * u.norm();
        if (gap <= opts.gap_tol * std::max(1.0, std::abs(level))) {
            out.status = LpStatus::Optimal;
            break;
        }
        if (calls >= opts.max_iter) break;
        const std::size_t before = verts.size();
        add_vertex(lmo.x);
        if (verts.size() == before) inner_tol = std::max(0.1 * inner_tol, 1e-15);
    }

    // A discovered vertex whose exact objective is no worse replaces the iterate,
    // which removes the smoothing offset when the optimum is a vertex.
    out.value = c.dot(out.x) + weight * (norm_map * out.x).norm();
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const double v = cverts[i] + weight * gverts[i].norm();
        if (v <= out.value) {
            out.value = v;
            out.x = verts[i];
        }
    }
    return out;
}

/// min c'x + weight * ||G x|| over {Ax = b, x >= 0} with the simplex as linear oracle.
inline LpSolution solve_lin_plus_norm(const LpProblem& problem, const Matrix& norm_map, double weight,
                                      const FwOptions& opts = {}) {
    LpProblem sub = problem;
    auto oracle = [&sub](const Vector& g) {
        sub.c = g;
        return solve_lp_simplex(sub);
    };
    return minimize_lin_plus_norm(problem.c, norm_map, weight, oracle, opts);
}

/// min c'x + weight * sqrt(x'Qx), Q = L L', over {Ax = b, x >= 0}.
inline LpSolution solve_lin_plus_norm(const LpProblem& problem, const PsdFactor& factor, double weight,
                                      const FwOptions& opts = {}) {
    require_dims(factor.dim(), problem.c.size(), "lin_plus_norm: factor dimension");
    return solve_lin_plus_norm(problem, Matrix(factor.lower.transpose()), weight, opts);
}

}  // namespace ptc
