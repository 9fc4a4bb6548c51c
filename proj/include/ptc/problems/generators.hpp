#pragma once

#include "ptc/predictors/predictor.hpp"
#include "ptc/robust/robust_lp.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace ptc {

enum class ProblemKind { Toy, ShortestPath, Knapsack };

inline std::string_view to_string(ProblemKind k) {
    switch (k) {
    case ProblemKind::Toy: return "toy";
    case ProblemKind::ShortestPath: return "shortest-path";
    case ProblemKind::Knapsack: return "knapsack";
    }
    return "?";
}

inline ProblemKind problem_kind_from_string(std::string_view s) {
    if (s == "toy") return ProblemKind::Toy;
    if (s == "shortest-path" || s == "shortest_path" || s == "sp") return ProblemKind::ShortestPath;
    if (s == "knapsack") return ProblemKind::Knapsack;
    throw Error(ErrorCode::ConfigInvalid, "unknown problem '" + std::string(s) + "'");
}

inline constexpr Index kGridSide = 5;
inline constexpr Index kGridEdges = 2 * kGridSide * (kGridSide - 1);

/**
 * Generative law of (z, c) for one problem family. Draw order per sample is
 * fixed: all of z first, then the noise of each objective coordinate in order.
 *   Toy:          z ~ U[-1/2, 1/2]^d, c = (sign(z1) + e) sqrt|z1|, e ~ U[-1/2, 1/2]
 *   ShortestPath: z ~ N(0, I_d), c_i = [((Theta z)_i / sqrt d + 3)^5 + 1] e_i,
 *                 e_i ~ U[3/4, 5/4], clamped below at 1e-6
 *   Knapsack:     z ~ U[0, 4]^d, c_i = (Theta z)_i^2 e_i, e_i ~ U[4/5, 6/5]
 * Knapsack objectives are utilities; the decision problem minimizes -c'x,
 * which cost_sign() = -1 records.
 */
struct CostModel {
    ProblemKind kind = ProblemKind::Toy;
    Index d = 1;
    Index n = 1;
    Matrix theta;  // n x d, empty for Toy

    double cost_sign() const { return kind == ProblemKind::Knapsack ? -1.0 : 1.0; }

    Vector sample_z(Rng& rng) const {
        Vector z(d);
        for (Index j = 0; j < d; ++j) {
            switch (kind) {
            case ProblemKind::Toy: z(j) = rng.uniform(-0.5, 0.5); break;
            case ProblemKind::ShortestPath: z(j) = rng.normal(); break;
            case ProblemKind::Knapsack: z(j) = rng.uniform(0.0, 4.0); break;
            }
        }
        return z;
    }

    /// Objective draw c | z in the generator's own sign convention.
    Vector sample_c(const Vector& z, Rng& rng) const {
        require_dims(z.size(), d, "sample_c: covariate length");
        Vector c(n);
        switch (kind) {
        case ProblemKind::Toy: {
            const double s = z(0) > 0.0 ? 1.0 : (z(0) < 0.0 ? -1.0 : 0.0);
            c(0) = (s + rng.uniform(-0.5, 0.5)) * std::sqrt(std::abs(z(0)));
            break;
        }
        case ProblemKind::ShortestPath: {
            const Vector u = theta * z / std::sqrt(static_cast<double>(d));
            for (Index i = 0; i < n; ++i) {
                const double base = std::pow(u(i) + 3.0, 5) + 1.0;
                c(i) = std::max(base * rng.uniform(0.75, 1.25), 1e-6);
            }
            break;
        }
        case ProblemKind::Knapsack: {
            const Vector u = theta * z;
            for (Index i = 0; i < n; ++i) c(i) = u(i) * u(i) * rng.uniform(0.8, 1.2);
            break;
        }
        }
        return c;
    }

    /// Draw of the minimized cost vector cost_sign * c.
    Vector sample_cost(const Vector& z, Rng& rng) const { return cost_sign() * sample_c(z, rng); }

    /// E[c | z] (before clamping for ShortestPath).
    Vector mean_c(const Vector& z) const {
        require_dims(z.size(), d, "mean_c: covariate length");
        Vector c(n);
        switch (kind) {
        case ProblemKind::Toy: {
            const double s = z(0) > 0.0 ? 1.0 : (z(0) < 0.0 ? -1.0 : 0.0);
            c(0) = s * std::sqrt(std::abs(z(0)));
            break;
        }
        case ProblemKind::ShortestPath: {
            const Vector u = theta * z / std::sqrt(static_cast<double>(d));
            for (Index i = 0; i < n; ++i) c(i) = std::pow(u(i) + 3.0, 5) + 1.0;
            break;
        }
        case ProblemKind::Knapsack: {
            const Vector u = theta * z;
            c = u.array().square().matrix();
            break;
        }
        }
        return c;
    }
};

struct ProblemInstance {
    CostModel model;
    Dataset data;  // C in the generator's convention (utilities for Knapsack)
    /// Feasible regions of the decision problem; one for Toy / ShortestPath, ten for Knapsack.
    std::vector<Constraints> constraint_sets;
    std::uint64_t seed = 0;
    /// Number of ShortestPath costs raised to the 1e-6 floor.
    Index clamped = 0;

    /// Minimized cost vectors cost_sign * C.
    Matrix costs() const { return model.cost_sign() * data.C; }
};

/// Bernoulli(1/2) 0-1 matrix with the last two columns zeroed.
inline Matrix bernoulli_theta(Index rows, Index d, Rng& rng) {
    require(d >= 3, ErrorCode::ConfigInvalid, "theta: covariate dimension must be >= 3");
    Matrix theta = Matrix::Zero(rows, d);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < d - 2; ++j) theta(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    return theta;
}

/// T samples drawn from the model; returns the number of clamped costs via `clamped`.
inline Dataset draw_dataset(const CostModel& model, Index T, Rng& rng, Index* clamped = nullptr) {
    Dataset data{Matrix(T, model.d), Matrix(T, model.n)};
    Index floor_hits = 0;
    for (Index t = 0; t < T; ++t) {
        const Vector z = model.sample_z(rng);
        const Vector c = model.sample_c(z, rng);
        if (model.kind == ProblemKind::ShortestPath) floor_hits += (c.array() <= 1e-6).count();
        data.Z.row(t) = z.transpose();
        data.C.row(t) = c.transpose();
    }
    if (clamped) *clamped = floor_hits;
    return data;
}

/// -1 <= x <= 1 for the one-dimensional toy problem.
inline Constraints toy_constraints() {
    Constraints c;
    c.lower = Vector::Constant(1, -1.0);
    c.upper = Vector::Constant(1, 1.0);
    return c;
}

/**
 * Node-arc incidence of the 5x5 grid, node r*5 + c. Columns: the 20
 * rightward edges (row-major), then the 20 downward edges (row-major);
 * +1 at the tail, -1 at the head. b routes one unit from node 0 to node 24.
 */
inline Constraints shortest_path_constraints() {
    const Index nodes = kGridSide * kGridSide;
    Matrix a = Matrix::Zero(nodes, kGridEdges);
    Index e = 0;
    for (Index r = 0; r < kGridSide; ++r) {
        for (Index c = 0; c + 1 < kGridSide; ++c, ++e) {
            a(r * kGridSide + c, e) = 1.0;
            a(r * kGridSide + c + 1, e) = -1.0;
        }
    }
    for (Index r = 0; r + 1 < kGridSide; ++r) {
        for (Index c = 0; c < kGridSide; ++c, ++e) {
            a(r * kGridSide + c, e) = 1.0;
            a((r + 1) * kGridSide + c, e) = -1.0;
        }
    }
    Vector b = Vector::Zero(nodes);
    b(0) = 1.0;
    b(nodes - 1) = -1.0;
    return Constraints::nonneg_equality(std::move(a), std::move(b));
}

struct KnapsackBudget {
    Vector prices;
    double budget = 0.0;
};

/// Prices p_j uniform integers on [1, 1000]; B ~ U[max p, 1'p - u max p], u ~ U[0, 1].
inline std::vector<KnapsackBudget> gen_knapsack_budgets(std::uint64_t seed, Index n = 20, int count = 10) {
    require(n >= 2, ErrorCode::ConfigInvalid, "knapsack: need at least two items");
    Rng rng = Rng::stream(seed, "knapsack-constraints");
    std::vector<KnapsackBudget> out;
    for (int k = 0; k < count; ++k) {
        KnapsackBudget kb;
        kb.prices.resize(n);
        for (Index j = 0; j < n; ++j) kb.prices(j) = static_cast<double>(rng.uniform_int(1, 1000));
        const double u = rng.uniform01();
        const double pmax = kb.prices.maxCoeff();
        kb.budget = rng.uniform(pmax, kb.prices.sum() - u * pmax);
        out.push_back(std::move(kb));
    }
    return out;
}

/// {x in [0, 1]^n : p'x <= B}.
inline Constraints knapsack_constraints(const KnapsackBudget& kb) {
    Constraints c;
    c.a_ub = kb.prices.transpose();
    c.b_ub = Vector::Constant(1, kb.budget);
    c.lower = Vector::Zero(kb.prices.size());
    c.upper = Vector::Ones(kb.prices.size());
    return c;
}

inline std::vector<Constraints> gen_knapsack_constraints(std::uint64_t seed, Index n = 20, int count = 10) {
    std::vector<Constraints> out;
    for (const auto& kb : gen_knapsack_budgets(seed, n, count)) out.push_back(knapsack_constraints(kb));
    return out;
}

/// Model for a problem family; Theta comes from the "theta" stream of the seed.
inline CostModel make_cost_model(ProblemKind kind, Index d, Index n, std::uint64_t seed) {
    require(d >= 1, ErrorCode::ConfigInvalid, "problem: covariate dimension must be >= 1");
    CostModel m;
    m.kind = kind;
    m.d = d;
    Rng rng = Rng::stream(seed, "theta");
    switch (kind) {
    case ProblemKind::Toy:
        m.n = 1;
        break;
    case ProblemKind::ShortestPath:
        m.n = kGridEdges;
        m.theta = bernoulli_theta(m.n, d, rng);
        break;
    case ProblemKind::Knapsack:
        require(n >= 2, ErrorCode::ConfigInvalid, "knapsack: need at least two items");
        m.n = n;
        m.theta = bernoulli_theta(n, d, rng);
        break;
    }
    return m;
}

inline std::vector<Constraints> constraint_sets_for(const CostModel& m, std::uint64_t seed) {
    switch (m.kind) {
    case ProblemKind::Toy: return {toy_constraints()};
    case ProblemKind::ShortestPath: return {shortest_path_constraints()};
    case ProblemKind::Knapsack: return gen_knapsack_constraints(seed, m.n);
    }
    return {};
}

/// Instance whose model and constraints derive from `model_seed` and whose samples from `data_seed`.
inline ProblemInstance make_instance(ProblemKind kind, Index T, Index d, Index n, std::uint64_t model_seed,
                                     std::uint64_t data_seed) {
    require(T >= 1, ErrorCode::ConfigInvalid, "problem: T must be >= 1");
    ProblemInstance inst;
    inst.model = make_cost_model(kind, d, n, model_seed);
    inst.constraint_sets = constraint_sets_for(inst.model, model_seed);
    inst.seed = data_seed;
    Rng rng = Rng::stream(data_seed, "data", to_string(kind));
    inst.data = draw_dataset(inst.model, T, rng, &inst.clamped);
    return inst;
}

inline ProblemInstance gen_toy(Index T, Index d, std::uint64_t seed) {
    return make_instance(ProblemKind::Toy, T, d, 1, seed, seed);
}

inline ProblemInstance gen_shortest_path(Index T, Index d, std::uint64_t seed) {
    return make_instance(ProblemKind::ShortestPath, T, d, kGridEdges, seed, seed);
}

inline ProblemInstance gen_knapsack(Index T, Index d, Index n, std::uint64_t seed) {
    return make_instance(ProblemKind::Knapsack, T, d, n, seed, seed);
}

}  // namespace ptc
