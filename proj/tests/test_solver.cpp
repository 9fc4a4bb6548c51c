#include "ptc/solver/cholesky.hpp"
#include "ptc/solver/frank_wolfe.hpp"
#include "ptc/solver/simplex.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace ptc;

namespace {

LpProblem two_var(Vector c, double a1, double a2, double b) {
    LpProblem p;
    p.c = std::move(c);
    p.A = Matrix(1, 2);
    p.A << a1, a2;
    p.b = Vector::Constant(1, b);
    return p;
}

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

}  // namespace

TEST(Simplex, SymmetricVertexTieGoesToFirstColumn) {
    const auto sol = solve_lp_simplex(two_var(vec({-1, -1}), 1, 1, 1));
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_DOUBLE_EQ(sol.value, -1.0);
    EXPECT_DOUBLE_EQ(sol.x(0), 1.0);
    EXPECT_DOUBLE_EQ(sol.x(1), 0.0);
}

TEST(Simplex, NegativeRhsWithNonnegativeColumnsIsInfeasible) {
    EXPECT_EQ(solve_lp_simplex(two_var(vec({1, 0}), 1, 1, -1)).status, LpStatus::Infeasible);
}

TEST(Simplex, RayIsUnbounded) {
    EXPECT_EQ(solve_lp_simplex(two_var(vec({-1, 0}), 1, -1, 0)).status, LpStatus::Unbounded);
}

TEST(Simplex, DimensionMismatchThrows) {
    LpProblem p = two_var(vec({1, 1}), 1, 1, 1);
    p.b = Vector::Ones(2);
    try {
        solve_lp_simplex(p);
        FAIL() << "expected throw";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(Simplex, RedundantRowsAreDropped) {
    LpProblem p;
    p.c = vec({1, 2, 3});
    p.A = Matrix(3, 3);
    p.A << 1, 1, 1,
           2, 2, 2,
           1, 0, -1;
    p.b = vec({2, 4, 0});
    const auto sol = solve_lp_simplex(p);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_NEAR(sol.value, 4.0, 1e-12);
    EXPECT_NEAR((p.A * sol.x - p.b).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Simplex, InconsistentDependentRowsAreInfeasible) {
    LpProblem p;
    p.c = vec({1, 1});
    p.A = Matrix(2, 2);
    p.A << 1, 1,
           2, 2;
    p.b = vec({1, 3});
    EXPECT_EQ(solve_lp_simplex(p).status, LpStatus::Infeasible);
}

TEST(Simplex, DuplicatedRowsLeaveTheOptimumUnchanged) {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const auto lp = oracle::random_bounded_lp(rng, 5, 3);
        LpProblem doubled{lp.c, Matrix(6, lp.A.cols()), Vector(6)};
        doubled.A << lp.A, 2.0 * lp.A;
        doubled.b << lp.b, 2.0 * lp.b;
        const auto a = solve_lp_simplex({lp.c, lp.A, lp.b});
        const auto b = solve_lp_simplex(doubled);
        ASSERT_EQ(a.status, b.status);
        if (a.optimal()) EXPECT_NEAR(a.value, b.value, 1e-9 * std::max(1.0, std::abs(a.value)));
    }
}

TEST(Simplex, MatchesVertexEnumerationOnRandomBoundedLps) {
    Rng rng(20240101);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 2 + static_cast<Index>(rng.uniform_int(0, 4));
        const Index m = 1 + static_cast<Index>(rng.uniform_int(0, std::min<Index>(2, n - 1)));
        const auto lp = oracle::random_bounded_lp(rng, n, m);
        const auto sol = solve_lp_simplex({lp.c, lp.A, lp.b});
        ASSERT_EQ(sol.status, LpStatus::Optimal) << "trial " << trial;
        const double oracle = oracle::vertex_enumeration_min(lp.c, lp.A, lp.b);
        EXPECT_NEAR(sol.value, oracle, 1e-8) << "trial " << trial;
        EXPECT_LE((lp.A * sol.x - lp.b).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_GE(sol.x.minCoeff(), -1e-9);
        EXPECT_NEAR(sol.value, lp.c.dot(sol.x), 1e-9);
    }
}

TEST(Simplex, DeterministicAcrossCalls) {
    Rng rng(7);
    const auto lp = oracle::random_bounded_lp(rng, 6, 3);
    const auto a = solve_lp_simplex({lp.c, lp.A, lp.b});
    const auto b = solve_lp_simplex({lp.c, lp.A, lp.b});
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.value, b.value);
}

TEST(Cholesky, IdentityGetsOneJitter) {
    const auto f = cholesky_jittered(Matrix::Identity(3, 3));
    EXPECT_NEAR(f.jitter, 1e-8, 1e-20);
    EXPECT_LT((f.lower - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Cholesky, HandVerifiedTwoByTwo) {
    Matrix q(2, 2);
    q << 4, 2, 2, 3;
    const auto f = cholesky_jittered(q, 0.0);
    Matrix expected(2, 2);
    expected << 2, 0, 1, std::sqrt(2.0);
    EXPECT_LT((f.lower - expected).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(f.jitter, 0.0);
}

TEST(Cholesky, IndefiniteFailsAtMaxJitter) {
    Matrix q(2, 2);
    q << 1, 2, 2, 1;
    try {
        cholesky_jittered(q);
        FAIL() << "expected NotPsd";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotPsd);
    }
}

TEST(Cholesky, SingularMatrixIsRescuedByJitter) {
    Matrix q = Matrix::Zero(3, 3);
    q(0, 0) = 1.0;
    const auto f = cholesky_jittered(q);
    EXPECT_GT(f.jitter, 0.0);
    EXPECT_LT((f.matrix() - q - f.jitter * Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(Mahalanobis, Examples) {
    EXPECT_EQ(mahalanobis(Vector::Zero(2), PsdFactor::identity(2)), 0.0);
    EXPECT_DOUBLE_EQ(mahalanobis(vec({3, 4}), PsdFactor::identity(2)), 5.0);
    Matrix q(2, 2);
    q << 4, 0, 0, 1;
    EXPECT_NEAR(mahalanobis(vec({2, 0}), cholesky_jittered(q, 0.0)), 1.0, 1e-12);
    EXPECT_THROW(mahalanobis(vec({1, 2, 3}), PsdFactor::identity(2)), Error);
}

TEST(Mahalanobis, MatchesDirectInverse) {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 1 + static_cast<Index>(rng.uniform_int(0, 4));
        Matrix m(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) m(i, j) = rng.normal();
        const Matrix q = m * m.transpose();
        const auto f = cholesky_jittered(q);
        const Matrix qj = q + f.jitter * Matrix::Identity(n, n);
        Vector r(n);
        for (Index i = 0; i < n; ++i) r(i) = rng.normal();
        const double direct = r.dot(qj.inverse() * r);
        const double d = mahalanobis(r, f);
        EXPECT_NEAR(d * d, direct, 1e-8 * std::max(1.0, direct));
    }
}

TEST(LinPlusNorm, ZeroWeightReducesToLp) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto lp = oracle::random_bounded_lp(rng, 5, 2);
        const LpProblem p{lp.c, lp.A, lp.b};
        const auto plain = solve_lp_simplex(p);
        const auto fw = solve_lin_plus_norm(p, PsdFactor::identity(5), 0.0);
        EXPECT_EQ(plain.status, fw.status);
        EXPECT_EQ(plain.value, fw.value);
    }
}

TEST(LinPlusNorm, SymmetricMinimumNormPoint) {
    const auto sol = solve_lin_plus_norm(two_var(vec({0, 0}), 1, 1, 1), PsdFactor::identity(2), 1.0);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    EXPECT_NEAR(sol.x(0), 0.5, 1e-4);
    EXPECT_NEAR(sol.x(1), 0.5, 1e-4);
    EXPECT_NEAR(sol.value, std::sqrt(0.5), 1e-4);
}

TEST(LinPlusNorm, MatchesGridOracle) {
    const auto sol = solve_lin_plus_norm(two_var(vec({-1, 0}), 1, 1, 1), PsdFactor::identity(2), 0.1);
    ASSERT_EQ(sol.status, LpStatus::Optimal);
    const auto [best, arg] = oracle::grid_min(
        [](double t) { return -t + 0.1 * std::sqrt(t * t + (1 - t) * (1 - t)); }, 0.0, 1.0, 1e-5);
    EXPECT_NEAR(sol.value, best, 1e-4);
    (void)arg;
}

TEST(LinPlusNorm, GapBoundsSuboptimalityAndWeightMonotone) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector c = vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        Matrix m(2, 2);
        m << rng.normal(), rng.normal(), rng.normal(), rng.normal();
        const Matrix q = m * m.transpose() + 0.1 * Matrix::Identity(2, 2);
        const auto f = cholesky_jittered(q);
        const LpProblem p = two_var(c, 1, 1, 1);
        const double lp_value = solve_lp_simplex(p).value;
        double previous = lp_value;
        for (double w : {0.0, 0.1, 0.5, 1.0, 2.0}) {
            const auto sol = solve_lin_plus_norm(p, f, w);
            ASSERT_TRUE(sol.optimal());
            EXPECT_GE(sol.value, lp_value - 1e-12);
            EXPECT_GE(sol.value, previous - 1e-9);
            previous = sol.value;
            const Matrix qq = f.matrix();
            const double delta = 1e-9 * qq.trace() / 2.0;
            auto smooth = [&](double t) {
                Vector x(2);
                x << t, 1 - t;
                return c.dot(x) + w * std::sqrt(x.dot(qq * x) + delta);
            };
            const auto [best, arg] = oracle::grid_min(smooth, 0.0, 1.0, 1e-5);
            (void)arg;
            EXPECT_LE(smooth(sol.x(0)) - best, sol.gap + 1e-9);
        }
    }
}
