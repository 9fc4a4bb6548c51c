#pragma once

#include "ptc/common.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <vector>

namespace ptc {

/// min c'x  s.t.  Ax = b, x >= 0.
struct LpProblem {
    Vector c;
    Matrix A;
    Vector b;

    Index num_vars() const { return c.size(); }
    Index num_rows() const { return A.rows(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NotConverged };

inline const char* to_string(LpStatus s) {
    switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::NotConverged: return "NotConverged";
    }
    return "?";
}

struct LpSolution {
    Vector x;
    double value = 0.0;
    LpStatus status = LpStatus::Infeasible;
    /// Frank-Wolfe duality gap of the returned iterate; zero for plain LPs.
    double gap = 0.0;
    int iterations = 0;

    bool optimal() const { return status == LpStatus::Optimal; }
};

struct SimplexOptions {
    double feas_tol = 1e-9;
    double pivot_tol = 1e-12;
    int max_pivots = 200000;
};

namespace detail {

// Dense tableau for the two-phase method. Columns [0, n) are structural,
// [n, n + m) artificial; the last column holds the right-hand side.
class Tableau {
public:
    Tableau(const LpProblem& p, const SimplexOptions& opt) : opt_(opt) {
        m_ = p.A.rows();
        n_ = p.A.cols();
        t_.setZero(m_, n_ + m_ + 1);
        for (Index i = 0; i < m_; ++i) {
            const double sign = p.b(i) < 0.0 ? -1.0 : 1.0;
            t_.row(i).head(n_) = sign * p.A.row(i);
            t_(i, n_ + i) = 1.0;
            t_(i, rhs()) = sign * p.b(i);
        }
        basis_.resize(static_cast<std::size_t>(m_));
        for (Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
        active_.assign(static_cast<std::size_t>(m_), true);
        orig_ = t_;
    }

    /// Recomputes the active rows as B^-1 [A | I | b] from the original data and reprices.
    void reinvert() {
        since_reinvert_ = 0;
        std::vector<Index> rows;
        for (Index i = 0; i < m_; ++i)
            if (active_[static_cast<std::size_t>(i)]) rows.push_back(i);
        const auto k = static_cast<Index>(rows.size());
        Matrix b(k, k);
        Matrix data(k, t_.cols());
        for (Index r = 0; r < k; ++r) {
            data.row(r) = orig_.row(rows[static_cast<std::size_t>(r)]);
            for (Index c = 0; c < k; ++c)
                b(r, c) = orig_(rows[static_cast<std::size_t>(r)], basis_[static_cast<std::size_t>(rows[static_cast<std::size_t>(c)])]);
        }
        Eigen::FullPivLU<Matrix> lu(b);
        if (lu.rank() < k) return;
        const Matrix fresh = lu.solve(data);
        const double tol = opt_.feas_tol * std::max(1.0, orig_.col(rhs()).cwiseAbs().maxCoeff());
        for (Index r = 0; r < k; ++r) {
            t_.row(rows[static_cast<std::size_t>(r)]) = fresh.row(r);
            double& v = t_(rows[static_cast<std::size_t>(r)], rhs());
            if (v < 0.0 && v > -tol) v = 0.0;
        }
        price(cost_);
    }

    Index rhs() const { return n_ + m_; }

    // Reduced costs for cost vector `cost` over all tableau columns.
    void price(const Vector& cost) {
        cost_ = cost;
        reduced_ = Vector::Zero(n_ + m_ + 1);
        reduced_.head(cost.size()) = cost;
        for (Index i = 0; i < m_; ++i) {
            if (!active_[static_cast<std::size_t>(i)]) continue;
            const Index bv = basis_[static_cast<std::size_t>(i)];
            const double cb = bv < cost.size() ? cost(bv) : 0.0;
            if (cb != 0.0) reduced_ -= cb * t_.row(i).transpose();
        }
    }

    void pivot(Index row, Index col) {
        const double piv = t_(row, col);
        if (std::abs(piv) < opt_.pivot_tol) {
            throw Error(ErrorCode::NumericalBreakdown, "simplex pivot below tolerance");
        }
        t_.row(row) /= piv;
        for (Index i = 0; i < m_; ++i) {
            if (i == row || !active_[static_cast<std::size_t>(i)]) continue;
            const double f = t_(i, col);
            if (f != 0.0) t_.row(i) -= f * t_.row(row);
        }
        const double f = reduced_(col);
        if (f != 0.0) reduced_ -= f * t_.row(row).transpose();
        basis_[static_cast<std::size_t>(row)] = col;
        ++pivots_;
        if (pivots_ > opt_.max_pivots) {
            throw Error(ErrorCode::NumericalBreakdown, "simplex pivot limit exceeded");
        }
        if (++since_reinvert_ >= kReinvertEvery) reinvert();
    }

    enum class Outcome { Optimal, Unbounded };

    // Dantzig's rule over columns [0, ncols); Bland's rule while a run of
    // degenerate pivots exceeds kStallLimit.
    Outcome run(Index ncols, double cost_tol) {
        constexpr int kStallLimit = 50;
        int stall = 0;
        for (;;) {
            Index enter = -1;
            double most = -cost_tol;
            for (Index j = 0; j < ncols; ++j) {
                if (reduced_(j) < most) {
                    enter = j;
                    if (stall >= kStallLimit) break;
                    most = reduced_(j);
                }
            }
            if (enter < 0) return Outcome::Optimal;

            const bool bland = stall >= kStallLimit;
            Index leave = -1;
            double best_ratio = kInf;
            if (!bland) {
                // Harris: bound the step with feasibility slack, then take the largest pivot under it.
                double bound = kInf;
                for (Index i = 0; i < m_; ++i) {
                    if (!active_[static_cast<std::size_t>(i)]) continue;
                    const double a = t_(i, enter);
                    if (a > opt_.feas_tol) bound = std::min(bound, (t_(i, rhs()) + opt_.feas_tol) / a);
                }
                double best_pivot = 0.0;
                for (Index i = 0; i < m_; ++i) {
                    if (!active_[static_cast<std::size_t>(i)]) continue;
                    const double a = t_(i, enter);
                    if (a <= opt_.feas_tol || t_(i, rhs()) / a > bound) continue;
                    if (a > best_pivot) {
                        best_pivot = a;
                        leave = i;
                    }
                }
                if (leave >= 0) best_ratio = std::max(t_(leave, rhs()) / t_(leave, enter), 0.0);
            } else {
                for (Index i = 0; i < m_; ++i) {
                    if (!active_[static_cast<std::size_t>(i)]) continue;
                    const double a = t_(i, enter);
                    if (a <= opt_.feas_tol) continue;
                    const double ratio = t_(i, rhs()) / a;
                    if (leave < 0) {
                        best_ratio = ratio;
                        leave = i;
                        continue;
                    }
                    const double slack = 1e-12 * std::max(1.0, std::abs(best_ratio));
                    if (ratio < best_ratio - slack) {
                        best_ratio = ratio;
                        leave = i;
                    } else if (ratio <= best_ratio + slack &&
                               basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
                        leave = i;
                    }
                }
            }
            if (leave < 0) return Outcome::Unbounded;
            stall = best_ratio <= opt_.feas_tol ? stall + 1 : 0;
            pivot(leave, enter);
            for (Index i = 0; i < m_; ++i)
                if (t_(i, rhs()) < 0.0) t_(i, rhs()) = 0.0;
        }
    }

    static constexpr int kReinvertEvery = 100;

    Matrix t_;
    Matrix orig_;
    Vector cost_;
    Vector reduced_;
    std::vector<Index> basis_;
    std::vector<bool> active_;
    Index m_ = 0;
    Index n_ = 0;
    int pivots_ = 0;
    int since_reinvert_ = 0;
    SimplexOptions opt_;
};

}  // namespace detail

namespace detail {

struct RowSelection {
    std::vector<Index> rows;
    bool consistent = true;
};

/// Linearly independent rows of A (rank-revealing QR of A'); dropped rows are checked against b.
inline RowSelection independent_rows(const Matrix& a, const Vector& b) {
    RowSelection sel;
    Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
    qr.setThreshold(1e-10);
    const Index rank = qr.rank();
    const auto& perm = qr.colsPermutation().indices();
    for (Index i = 0; i < rank; ++i) sel.rows.push_back(perm(i));
    std::sort(sel.rows.begin(), sel.rows.end());
    if (rank == a.rows()) return sel;
    Matrix kept(a.cols(), rank);
    Vector kept_b(rank);
    for (Index i = 0; i < rank; ++i) {
        kept.col(i) = a.row(sel.rows[static_cast<std::size_t>(i)]).transpose();
        kept_b(i) = b(sel.rows[static_cast<std::size_t>(i)]);
    }
    Eigen::ColPivHouseholderQR<Matrix> basis(kept);
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    for (Index i = 0; i < a.rows(); ++i) {
        if (std::binary_search(sel.rows.begin(), sel.rows.end(), i)) continue;
        const Vector y = basis.solve(Vector(a.row(i).transpose()));
        if (std::abs(b(i) - y.dot(kept_b)) > 1e-9 * scale) sel.consistent = false;
    }
    return sel;
}

inline LpSolution simplex_full_rank(const LpProblem& problem, const SimplexOptions& opt);

}  // namespace detail

/**
 * Two-phase primal simplex on a dense tableau; Dantzig pricing with a Bland
 * fallback on degenerate stalls.
 *
 * Dependent equality rows are removed first, or the problem is reported
 * infeasible when they disagree with b. Phase 1 minimizes the sum of
 * artificials; artificials left in the basis at zero level are pivoted out or
 * their rows dropped as redundant. The final
 * basic solution is recomputed from the original data (refactorization) so the
 * returned point does not carry accumulated tableau round-off.
 */
inline LpSolution solve_lp_simplex(const LpProblem& problem, const SimplexOptions& opt = {}) {
    require_dims(problem.c.size(), problem.A.cols(), "LpProblem.c length");
    require_dims(problem.b.size(), problem.A.rows(), "LpProblem.b length");
    require(problem.A.allFinite() && problem.b.allFinite() && problem.c.allFinite(),
            ErrorCode::DimensionMismatch, "LpProblem has non-finite entries");
    if (problem.A.rows() == 0) return detail::simplex_full_rank(problem, opt);
    const auto sel = detail::independent_rows(problem.A, problem.b);
    if (!sel.consistent) {
        LpSolution sol;
        sol.x = Vector::Zero(problem.A.cols());
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    if (static_cast<Index>(sel.rows.size()) == problem.A.rows()) return detail::simplex_full_rank(problem, opt);
    LpProblem reduced;
    reduced.c = problem.c;
    reduced.A.resize(static_cast<Index>(sel.rows.size()), problem.A.cols());
    reduced.b.resize(static_cast<Index>(sel.rows.size()));
    for (std::size_t i = 0; i < sel.rows.size(); ++i) {
        reduced.A.row(static_cast<Index>(i)) = problem.A.row(sel.rows[i]);
        reduced.b(static_cast<Index>(i)) = problem.b(sel.rows[i]);
    }
    return detail::simplex_full_rank(reduced, opt);
}

namespace detail {

inline LpSolution simplex_full_rank(const LpProblem& problem, const SimplexOptions& opt) {
    const Index m = problem.A.rows();
    const Index n = problem.A.cols();

    LpSolution sol;
    sol.x = Vector::Zero(n);
    if (m == 0) {
        if ((problem.c.array() < 0.0).any()) {
            sol.status = LpStatus::Unbounded;
            return sol;
        }
        sol.status = LpStatus::Optimal;
        return sol;
    }

    detail::Tableau tab(problem, opt);

    // Phase 1.
    Vector phase1 = Vector::Zero(n + m);
    phase1.tail(m).setOnes();
    tab.price(phase1);
    tab.run(n + m, opt.feas_tol);
    const double infeas = -tab.reduced_(tab.rhs());
    const double b_scale = std::max(1.0, problem.b.cwiseAbs().maxCoeff());
    if (infeas > 1e-8 * b_scale) {
        sol.status = LpStatus::Infeasible;
        sol.iterations = tab.pivots_;
        return sol;
    }

    // Drive remaining artificials out of the basis.
    for (Index i = 0; i < m; ++i) {
        if (tab.basis_[static_cast<std::size_t>(i)] < n) continue;
        Index col = -1;
        double best = 1e-9;
        for (Index j = 0; j < n; ++j) {
            if (std::abs(tab.t_(i, j)) > best) {
                best = std::abs(tab.t_(i, j));
                col = j;
            }
        }
        if (col >= 0) {
            tab.pivot(i, col);
        } else {
            tab.active_[static_cast<std::size_t>(i)] = false;
        }
    }

    // Phase 2 over structural columns only; a refactorized basis that is not
    // primal feasible triggers a reinversion and another pass.
    const double cost_tol = opt.feas_tol * std::max(1.0, problem.c.cwiseAbs().maxCoeff());
    tab.price(problem.c);
    for (int attempt = 0;; ++attempt) {
        const auto outcome = tab.run(n, cost_tol);
        sol.iterations = tab.pivots_;
        if (outcome == detail::Tableau::Outcome::Unbounded) {
            sol.status = LpStatus::Unbounded;
            return sol;
        }

        // Refactorize: solve B x_B = b on the active rows.
        std::vector<Index> rows;
        std::vector<Index> cols;
        for (Index i = 0; i < m; ++i) {
            if (!tab.active_[static_cast<std::size_t>(i)]) continue;
            rows.push_back(i);
            cols.push_back(tab.basis_[static_cast<std::size_t>(i)]);
        }
        const auto k = static_cast<Index>(rows.size());
        Matrix basis(k, k);
        Vector rhs(k);
        for (Index r = 0; r < k; ++r) {
            rhs(r) = problem.b(rows[static_cast<std::size_t>(r)]);
            for (Index c = 0; c < k; ++c) {
                basis(r, c) = problem.A(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
            }
        }
        Eigen::FullPivLU<Matrix> lu(basis);
        if (lu.rank() < k) {
            throw Error(ErrorCode::NumericalBreakdown, "singular basis after refactorization");
        }
        const Vector xb = lu.solve(rhs);
        const double tol = opt.feas_tol * b_scale;
        if (xb.minCoeff() < -1e3 * tol) {
            if (attempt >= 3) throw Error(ErrorCode::NumericalBreakdown, "basis lost primal feasibility");
            tab.reinvert();
            continue;
        }
        sol.x.setZero();
        for (Index r = 0; r < k; ++r) sol.x(cols[static_cast<std::size_t>(r)]) = std::max(xb(r), 0.0);
        break;
    }
    sol.value = problem.c.dot(sol.x);
    sol.status = LpStatus::Optimal;
    return sol;
}

}  // namespace detail

}  // namespace ptc
