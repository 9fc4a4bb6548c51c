#pragma once

#include "ptc/calibrate/uncertainty_set.hpp"
#include "ptc/solver/frank_wolfe.hpp"
#include "ptc/solver/simplex.hpp"

#include <numeric>
#include <vector>

namespace ptc {

/**
 * Feasible region {x : A_eq x = b_eq, A_ub x <= b_ub, lower <= x <= upper}.
 * Bounds must straddle zero (lower <= 0 <= upper, either may be infinite);
 * empty bound vectors mean x >= 0.
 */
struct Constraints {
    Matrix a_eq;
    Vector b_eq;
    Matrix a_ub;
    Vector b_ub;
    Vector lower;
    Vector upper;

    Index dim() const { return std::max(a_eq.cols(), std::max(a_ub.cols(), lower.size())); }

    static Constraints nonneg_equality(Matrix a, Vector b) {
        Constraints c;
        c.a_eq = std::move(a);
        c.b_eq = std::move(b);
        return c;
    }

    Vector lower_or_zero() const { return lower.size() ? lower : Vector::Zero(dim()); }
    Vector upper_or_inf() const { return upper.size() ? upper : Vector::Constant(dim(), kInf); }

    bool feasible(const Vector& x, double tol = 1e-7) const {
        if (a_eq.rows() && (a_eq * x - b_eq).cwiseAbs().maxCoeff() > tol) return false;
        if (a_ub.rows() && (a_ub * x - b_ub).maxCoeff() > tol) return false;
        return (x - lower_or_zero()).minCoeff() >= -tol && (upper_or_inf() - x).minCoeff() >= -tol;
    }
};

/**
 * Standard-form encoding {A y = b, y >= 0} of a Constraints region with the
 * linear lift x = M y. Each x_j maps to y+ (column +1) and, when its lower
 * bound is negative, y- (column -1); finite bounds and inequality rows get
 * slack columns, which have zero lift columns.
 */
struct StandardForm {
    Matrix A;
    Vector b;
    Matrix lift;  // n x N

    Index dim() const { return lift.rows(); }
    Index lifted_dim() const { return lift.cols(); }
    Vector to_x(const Vector& y) const { return lift * y; }
    LpProblem problem(Vector cy) const { return LpProblem{std::move(cy), A, b}; }
};

inline StandardForm to_standard_form(const Constraints& cons) {
    const Index n = cons.dim();
    require(n >= 1, ErrorCode::DimensionMismatch, "constraints: no decision variables");
    require(cons.a_eq.rows() == cons.b_eq.size() && (cons.a_eq.rows() == 0 || cons.a_eq.cols() == n),
            ErrorCode::DimensionMismatch, "constraints: equality block shape");
    require(cons.a_ub.rows() == cons.b_ub.size() && (cons.a_ub.rows() == 0 || cons.a_ub.cols() == n),
            ErrorCode::DimensionMismatch, "constraints: inequality block shape");
    const Vector lo = cons.lower_or_zero();
    const Vector hi = cons.upper_or_inf();
    require(lo.size() == n && hi.size() == n, ErrorCode::DimensionMismatch, "constraints: bound lengths");
    require((lo.array() <= 0.0).all() && (hi.array() >= 0.0).all(), ErrorCode::DomainError,
            "constraints: bounds must satisfy lower <= 0 <= upper");

    // Column layout: [y+ (n) | y- (split vars) | bound slacks | inequality slacks].
    std::vector<Index> split;
    for (Index j = 0; j < n; ++j)
        if (lo(j) < 0.0) split.push_back(j);
    struct BoundRow {
        Index column;
        double value;
    };
    std::vector<BoundRow> bounds;
    for (Index j = 0; j < n; ++j)
        if (std::isfinite(hi(j))) bounds.push_back({j, hi(j)});
    for (std::size_t k = 0; k < split.size(); ++k)
        if (std::isfinite(lo(split[k]))) bounds.push_back({n + static_cast<Index>(k), -lo(split[k])});

    const auto ns = static_cast<Index>(split.size());
    const auto nb = static_cast<Index>(bounds.size());
    const Index mu = cons.a_ub.rows();
    const Index me = cons.a_eq.rows();
    const Index N = n + ns + nb + mu;
    StandardForm sf;
    sf.lift = Matrix::Zero(n, N);
    for (Index j = 0; j < n; ++j) sf.lift(j, j) = 1.0;
    for (Index k = 0; k < ns; ++k) sf.lift(split[static_cast<std::size_t>(k)], n + k) = -1.0;

    const Index rows = me + mu + nb;
    sf.A = Matrix::Zero(rows, N);
    sf.b = Vector::Zero(rows);
    if (me) {
        sf.A.topLeftCorner(me, n + ns) = cons.a_eq * sf.lift.leftCols(n + ns);
        sf.b.head(me) = cons.b_eq;
    }
    if (mu) {
        sf.A.block(me, 0, mu, n + ns) = cons.a_ub * sf.lift.leftCols(n + ns);
        sf.A.block(me, n + ns + nb, mu, mu) = Matrix::Identity(mu, mu);
        sf.b.segment(me, mu) = cons.b_ub;
    }
    for (Index k = 0; k < nb; ++k) {
        const auto& br = bounds[static_cast<std::size_t>(k)];
        sf.A(me + mu + k, br.column) = 1.0;
        sf.A(me + mu + k, n + ns + k) = 1.0;
        sf.b(me + mu + k) = br.value;
    }
    return sf;
}

struct RobustSolution {
    Vector x;
    double worst_case_value = 0.0;
    LpStatus status = LpStatus::Optimal;
    /// Frank-Wolfe duality gap (0 for LP-solved sets).
    double gap = 0.0;

    bool optimal() const { return status == LpStatus::Optimal; }
};

/// max_{c in set} c'x.
inline double worst_case_objective(const UncertaintySet& set, const Vector& x) { return set.support(x); }

/// Lifted cost whose minimum over y equals min_x max_{c in box} c'x.
inline Vector box_lifted_cost(const UncertaintySet& box, const StandardForm& sf) {
    Vector cy = Vector::Zero(sf.lifted_dim());
    for (Index col = 0; col < sf.lifted_dim(); ++col) {
        for (Index j = 0; j < sf.dim(); ++j) {
            if (sf.lift(j, col) > 0.0) cy(col) = box.upper(j);
            if (sf.lift(j, col) < 0.0) cy(col) = -box.lower(j);
        }
    }
    return cy;
}

/**
 * Solves min_x max_{c in set} c'x over the constraints.
 *  - Box: exact LP on the lifted corner costs (upper corner on +x, lower on -x).
 *  - Ellipsoid / NormBall: center'x + radius ||G x|| by conditional gradient,
 *    G = L' (ellipsoid) or I (ball), composed with the lift.
 * worst_case_value is the support function at the returned x.
 */
inline RobustSolution solve_robust(const UncertaintySet& set, const StandardForm& sf, const FwOptions& fw = {}) {
    require_dims(set.dim(), sf.dim(), "solve_robust: set dimension");
    LpSolution lp;
    if (set.kind == SetKind::Box) {
        lp = solve_lp_simplex(sf.problem(box_lifted_cost(set, sf)));
    } else {
        const Matrix g = set.kind == SetKind::Ellipsoid ? Matrix(set.factor.lower.transpose() * sf.lift) : sf.lift;
        lp = solve_lin_plus_norm(sf.problem(sf.lift.transpose() * set.center), g, set.radius, fw);
    }
    RobustSolution out;
    out.status = lp.status;
    out.gap = lp.gap;
    if (lp.status == LpStatus::Optimal || lp.status == LpStatus::NotConverged) {
        out.x = sf.to_x(lp.x);
        out.worst_case_value = worst_case_objective(set, out.x);
    }
    return out;
}

inline RobustSolution solve_robust(const UncertaintySet& set, const Constraints& cons, const FwOptions& fw = {}) {
    return solve_robust(set, to_standard_form(cons), fw);
}

struct GuaranteeCheck {
    bool covered = false;
    bool cost_ok = false;
};

/// Deterministic half of the robustness guarantee: covered implies cost_ok.
inline GuaranteeCheck check_guarantee(const RobustSolution& sol, const UncertaintySet& set, const Vector& c) {
    GuaranteeCheck g;
    g.covered = set.contains(c);
    g.cost_ok = c.dot(sol.x) <= sol.worst_case_value + 1e-9 * std::max(1.0, std::abs(sol.worst_case_value));
    return g;
}

struct CvarSolution {
    Vector x;
    double gamma = 0.0;
    double value = 0.0;
    LpStatus status = LpStatus::Optimal;

    bool optimal() const { return status == LpStatus::Optimal; }
};

/// gamma + sum_k (c_k'x - gamma)+ / (K (1 - alpha)) for fixed x.
inline double cvar_objective(const Matrix& samples, const Vector& x, double alpha, double gamma) {
    const Vector costs = samples * x;
    const double tail = (costs.array() - gamma).max(0.0).sum();
    return gamma + tail / (static_cast<double>(samples.rows()) * (1.0 - alpha));
}

namespace detail {

/// Distinct sample rows (lexicographic order) with their multiplicities.
inline std::pair<Matrix, Vector> merge_duplicate_rows(const Matrix& samples) {
    std::vector<Index> order(static_cast<std::size_t>(samples.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    auto less = [&](Index a, Index b) {
        for (Index j = 0; j < samples.cols(); ++j)
            if (samples(a, j) != samples(b, j)) return samples(a, j) < samples(b, j);
        return false;
    };
    std::stable_sort(order.begin(), order.end(), less);
    std::vector<Index> firsts;
    std::vector<double> counts;
    for (Index t : order) {
        if (!firsts.empty() && !less(firsts.back(), t)) {
            counts.back() += 1.0;
            continue;
        }
        firsts.push_back(t);
        counts.push_back(1.0);
    }
    Matrix rows(static_cast<Index>(firsts.size()), samples.cols());
    for (std::size_t k = 0; k < firsts.size(); ++k) rows.row(static_cast<Index>(k)) = samples.row(firsts[k]);
    return {std::move(rows), Eigen::Map<const Vector>(counts.data(), static_cast<Index>(counts.size()))};
}

}  // namespace detail

/**
 * Empirical CVaR LP over the constraints with samples as rows (K x n):
 *   min gamma + 1/(K(1-alpha)) sum_k u_k,  u_k >= c_k'x - gamma,  u_k >= 0.
 * Identical samples are merged into one weighted scenario. Lifted columns:
 * [y | gamma+ gamma- | u (K') | s (K')] over the K' distinct scenarios. Costs
 * are divided by max(1, max |sample|) inside the program and gamma, value
 * rescaled after.
 */
inline CvarSolution solve_cvar_lp(const Matrix& samples, double alpha, const StandardForm& sf) {
    require(samples.rows() >= 1, ErrorCode::ConfigInvalid, "cvar: need at least one sample");
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::ConfigInvalid, "cvar: alpha must lie in (0,1)");
    require_dims(samples.cols(), sf.dim(), "cvar: sample width");
    const auto [scenarios, counts] = detail::merge_duplicate_rows(samples);
    const Index K = scenarios.rows();
    const Index N = sf.lifted_dim();
    const Index m = sf.A.rows();
    const Index cols = N + 2 + 2 * K;
    const double scale = std::max(1.0, samples.cwiseAbs().maxCoeff());
    LpProblem p;
    p.A = Matrix::Zero(m + K, cols);
    p.b = Vector::Zero(m + K);
    p.A.topLeftCorner(m, N) = sf.A;
    p.b.head(m) = sf.b;
    p.A.block(m, 0, K, N) = scenarios * sf.lift / scale;
    p.A.block(m, N, K, 1).setConstant(-1.0);
    p.A.block(m, N + 1, K, 1).setConstant(1.0);
    p.A.block(m, N + 2, K, K) = -Matrix::Identity(K, K);
    p.A.block(m, N + 2 + K, K, K) = Matrix::Identity(K, K);
    p.c = Vector::Zero(cols);
    p.c(N) = 1.0;
    p.c(N + 1) = -1.0;
    p.c.segment(N + 2, K) = counts / (static_cast<double>(samples.rows()) * (1.0 - alpha));

    const auto lp = solve_lp_simplex(p);
    CvarSolution out;
    out.status = lp.status;
    if (lp.optimal()) {
        out.x = sf.to_x(lp.x.head(N));
        out.gamma = scale * (lp.x(N) - lp.x(N + 1));
        out.value = scale * lp.value;
    }
    return out;
}

inline CvarSolution solve_cvar_lp(const Matrix& samples, double alpha, const Constraints& cons) {
    return solve_cvar_lp(samples, alpha, to_standard_form(cons));
}

}  // namespace ptc
