#pragma once

#include "ptc/bench/baselines.hpp"
#include "ptc/bench/parallel.hpp"
#include "ptc/calibrate/conformal.hpp"
#include "ptc/calibrate/individual.hpp"
#include "ptc/dro/dro.hpp"
#include "ptc/problems/generators.hpp"

#include <json.hpp>

#include <cstdio>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace ptc {

enum class Method { PtcB, PtcE, Ellipsoid, Knn, Dro, Individual, Cvar };

inline std::string_view to_string(Method m) {
    switch (m) {
    case Method::PtcB: return "ptc-b";
    case Method::PtcE: return "ptc-e";
    case Method::Ellipsoid: return "ellipsoid";
    case Method::Knn: return "knn";
    case Method::Dro: return "dro";
    case Method::Individual: return "individual";
    case Method::Cvar: return "cvar";
    }
    return "?";
}

inline Method method_from_string(std::string_view s) {
    for (Method m : {Method::PtcB, Method::PtcE, Method::Ellipsoid, Method::Knn, Method::Dro, Method::Individual,
                     Method::Cvar})
        if (to_string(m) == s) return m;
    throw Error(ErrorCode::ConfigInvalid, "unknown method '" + std::string(s) + "'");
}

struct ExperimentConfig {
    ProblemKind problem = ProblemKind::ShortestPath;
    std::vector<Method> methods;
    std::vector<double> alphas;
    Index T = 1000;
    Index d = 10;
    /// Item count; used by knapsack only.
    Index n = 20;
    int trials = 20;
    /// Test covariates per trial; 0 selects 100 for knapsack and 500 otherwise.
    Index tests = 0;
    /// Conditional cost draws per test covariate.
    Index var_samples = 1000;
    /// Kernel-resampled scenarios per CVaR program.
    Index cvar_samples = 100;
    PredictorKind predictor = PredictorKind::KernelRidgeRbf;
    QuantileKind quantile = QuantileKind::MlpPinball;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;

    Index test_count() const {
        if (tests > 0) return tests;
        return problem == ProblemKind::Knapsack ? 100 : 500;
    }

    void validate() const {
        auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); };
        if (methods.empty()) fail("config: at least one method is required");
        if (alphas.empty()) fail("config: at least one alpha is required");
        for (double a : alphas)
            if (!(a > 0.0 && a < 1.0)) fail("config: alphas must lie in (0,1)");
        if (std::set<Method>(methods.begin(), methods.end()).size() != methods.size()) fail("config: duplicate method");
        if (T < 20) fail("config: T must be >= 20");
        if (d < 1) fail("config: d must be >= 1");
        if (problem != ProblemKind::Toy && d < 3) fail("config: d must be >= 3 for this problem");
        if (problem == ProblemKind::Knapsack && n < 2) fail("config: n must be >= 2");
        if (trials < 1) fail("config: trials must be >= 1");
        if (tests < 0) fail("config: tests must be >= 0");
        if (var_samples < 1) fail("config: var-samples must be >= 1");
        if (cvar_samples < 1) fail("config: cvar-samples must be >= 1");
    }
};

inline const std::vector<std::string>& experiment_config_keys() {
    static const std::vector<std::string> keys = {"problem", "methods",    "alphas",       "T",         "d",
                                                  "n",       "trials",     "tests",        "var-samples", "cvar-samples",
                                                  "predictor", "quantile", "seed",         "jobs"};
    return keys;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["problem"] = std::string(to_string(c.problem));
    j["methods"] = nlohmann::json::array();
    for (Method m : c.methods) j["methods"].push_back(std::string(to_string(m)));
    j["alphas"] = c.alphas;
    j["T"] = c.T;
    j["d"] = c.d;
    j["n"] = c.n;
    j["trials"] = c.trials;
    j["tests"] = c.tests;
    j["var-samples"] = c.var_samples;
    j["cvar-samples"] = c.cvar_samples;
    j["predictor"] = std::string(to_string(c.predictor));
    j["quantile"] = std::string(to_string(c.quantile));
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    return j;
}

/// Overlays the keys present in j onto base; unknown keys and ill-typed values are ConfigInvalid.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base = {}) {
    require(j.is_object(), ErrorCode::ConfigInvalid, "config: top level must be an object");
    const auto& keys = experiment_config_keys();
    for (const auto& item : j.items())
        require(std::find(keys.begin(), keys.end(), item.key()) != keys.end(), ErrorCode::ConfigInvalid,
                "config: unknown key '" + item.key() + "'");
    try {
        if (j.contains("problem")) base.problem = problem_kind_from_string(j["problem"].get<std::string>());
        if (j.contains("methods")) {
            base.methods.clear();
            for (const auto& m : j["methods"]) base.methods.push_back(method_from_string(m.get<std::string>()));
        }
        if (j.contains("alphas")) base.alphas = j["alphas"].get<std::vector<double>>();
        if (j.contains("T")) base.T = j["T"].get<Index>();
        if (j.contains("d")) base.d = j["d"].get<Index>();
        if (j.contains("n")) base.n = j["n"].get<Index>();
        if (j.contains("trials")) base.trials = j["trials"].get<int>();
        if (j.contains("tests")) base.tests = j["tests"].get<Index>();
        if (j.contains("var-samples")) base.var_samples = j["var-samples"].get<Index>();
        if (j.contains("cvar-samples")) base.cvar_samples = j["cvar-samples"].get<Index>();
        if (j.contains("predictor")) base.predictor = predictor_kind_from_string(j["predictor"].get<std::string>());
        if (j.contains("quantile")) base.quantile = quantile_kind_from_string(j["quantile"].get<std::string>());
        if (j.contains("seed")) base.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("jobs")) base.jobs = j["jobs"].get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("config: ") + e.what());
    }
    return base;
}

struct ReportRow {
    double alpha = 0.0;
    Method method = Method::PtcB;
    double avg_var = 0.0;
    double avg_opt = 0.0;
    double avg_coverage = 0.0;
    /// Trials that completed; failed trials are excluded from the averages.
    int trials = 0;
    int failures = 0;
    std::uint64_t seed = 0;
    /// First failure message, empty when none failed.
    std::string error;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ReportRow> rows;  // alpha-major, both in config order

    bool any_method_failed_everywhere() const {
        for (const auto& r : rows)
            if (r.trials == 0) return true;
        return false;
    }
};

namespace detail {

struct CellTotals {
    bool failed = false;
    std::string error;
    double var = 0.0;
    double opt = 0.0;
    double coverage = 0.0;
    Index count = 0;
};

struct CellState {
    std::optional<BoxCalibration> box;
    std::optional<EllipsoidCalibration> ellipsoid;
    std::optional<UncertaintySet> fixed_set;
    std::vector<RobustSolution> fixed_solutions;
};

struct DecisionEval {
    Vector x;
    double opt = 0.0;
};

inline RobustSolution checked(RobustSolution sol) {
    require(sol.status == LpStatus::Optimal || sol.status == LpStatus::NotConverged, ErrorCode::NumericalBreakdown,
            "robust solve ended with status " + std::to_string(static_cast<int>(sol.status)));
    return sol;
}

/// Conditional-gradient budget for benchmark solves; NotConverged iterates are still used.
inline FwOptions bench_fw_options() {
    FwOptions fw;
    fw.gap_tol = 1e-5;
    fw.max_iter = 1000;
    return fw;
}

inline std::vector<DecisionEval> solve_all(const UncertaintySet& set, const std::vector<StandardForm>& forms) {
    std::vector<DecisionEval> out;
    for (const auto& sf : forms) {
        auto sol = checked(solve_robust(set, sf, bench_fw_options()));
        out.push_back({std::move(sol.x), sol.worst_case_value});
    }
    return out;
}

/// Fraction of sample rows with c'x <= opt, averaged over the decisions.
inline double guarantee_coverage(const std::vector<DecisionEval>& evals, const Matrix& samples) {
    double total = 0.0;
    for (const auto& e : evals) {
        const Vector costs = samples * e.x;
        const double tol = 1e-9 * std::max(1.0, std::abs(e.opt));
        total += static_cast<double>((costs.array() <= e.opt + tol).count()) / static_cast<double>(costs.size());
    }
    return total / static_cast<double>(evals.size());
}

inline Matrix take_index_rows(const Matrix& m, const std::vector<std::size_t>& perm, std::size_t from,
                              std::size_t to) {
    return take_rows(m, std::vector<std::size_t>(perm.begin() + static_cast<std::ptrdiff_t>(from),
                                                 perm.begin() + static_cast<std::ptrdiff_t>(to)));
}

/// One trial: cells indexed alpha-major like the report rows.
inline std::vector<CellTotals> run_trial(const ExperimentConfig& cfg, int trial) {
    const std::size_t A = cfg.alphas.size();
    const std::size_t M = cfg.methods.size();
    std::vector<CellTotals> cells(A * M);
    auto fail_all = [&](const std::string& what) {
        for (auto& c : cells) {
            c.failed = true;
            c.error = what;
        }
        return cells;
    };

    const std::uint64_t trial_seed = derive_seed(cfg.seed, "trial", static_cast<std::uint64_t>(trial));
    ProblemInstance inst;
    std::shared_ptr<const Predictor> f;
    std::vector<StandardForm> forms;
    Matrix costs, zl, cl, zv, cv;
    double bandwidth = 0.0;
    const KernelSpec kernel{KernelKind::TruncatedGaussian, 3.0};
    try {
        inst = make_instance(cfg.problem, cfg.T, cfg.d, cfg.n, cfg.seed, trial_seed);
        costs = inst.costs();
        const auto T = static_cast<std::size_t>(cfg.T);
        const auto perm = Rng::stream(trial_seed, "split").permutation(T);
        const auto n_learn = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(T)));
        zl = take_index_rows(inst.data.Z, perm, 0, n_learn);
        cl = take_index_rows(costs, perm, 0, n_learn);
        zv = take_index_rows(inst.data.Z, perm, n_learn, T);
        cv = take_index_rows(costs, perm, n_learn, T);
        PredictorConfig pcfg;
        pcfg.kind = cfg.predictor;
        f = std::make_shared<const Predictor>(fit_predictor(Dataset{zl, cl}, pcfg, derive_seed(trial_seed, "predictor")));
        for (const auto& cons : inst.constraint_sets) forms.push_back(to_standard_form(cons));
        const Matrix centered = inst.data.Z.rowwise() - inst.data.Z.colwise().mean();
        const double spread = (centered.colwise().norm() / std::sqrt(static_cast<double>(cfg.T - 1))).mean();
        bandwidth = default_bandwidth(zv.rows(), cfg.d) * spread;
    } catch (const std::exception& e) {
        return fail_all(e.what());
    }

    QuantileConfig qcfg;
    qcfg.kind = cfg.quantile;
    std::vector<CellState> states(A * M);
    for (std::size_t a = 0; a < A; ++a) {
        const double alpha = cfg.alphas[a];
        for (std::size_t m = 0; m < M; ++m) {
            auto& st = states[a * M + m];
            try {
                switch (cfg.methods[m]) {
                case Method::PtcB:
                    st.box = buq_fit(f, zv, cv, alpha, 0.5, qcfg, derive_seed(trial_seed, "ptc-b", a));
                    break;
                case Method::PtcE:
                    st.ellipsoid = euq_fit(f, zv, cv, alpha, 0.5, qcfg, derive_seed(trial_seed, "ptc-e", a));
                    break;
                case Method::Ellipsoid: {
                    st.fixed_set = baseline_ellipsoid(costs, alpha);
                    for (const auto& sf : forms)
                        st.fixed_solutions.push_back(checked(solve_robust(*st.fixed_set, sf, bench_fw_options())));
                    break;
                }
                default: break;
                }
            } catch (const std::exception& e) {
                cells[a * M + m].failed = true;
                cells[a * M + m].error = e.what();
            }
        }
    }

    Rng zrng = Rng::stream(trial_seed, "test-z");
    const Index tests = cfg.test_count();
    for (Index j = 0; j < tests; ++j) {
        const Vector z = inst.model.sample_z(zrng);
        Rng crng = Rng::stream(trial_seed, "test-c", static_cast<std::uint64_t>(j));
        Matrix samples(cfg.var_samples, inst.model.n);
        for (Index k = 0; k < cfg.var_samples; ++k) samples.row(k) = inst.model.sample_cost(z, crng).transpose();

        std::optional<std::pair<UncertaintySet, std::vector<DecisionEval>>> knn_cache;
        std::optional<std::vector<DecisionEval>> dro_cache;
        std::optional<Matrix> scenarios;

        for (std::size_t a = 0; a < A; ++a) {
            const double alpha = cfg.alphas[a];
            for (std::size_t m = 0; m < M; ++m) {
                auto& cell = cells[a * M + m];
                if (cell.failed) continue;
                const auto& st = states[a * M + m];
                try {
                    std::vector<DecisionEval> evals;
                    double coverage = 0.0;
                    switch (cfg.methods[m]) {
                    case Method::PtcB:
                    case Method::PtcE:
                    case Method::Individual: {
                        const UncertaintySet set = st.box            ? st.box->set_at(z)
                                                   : st.ellipsoid    ? st.ellipsoid->set_at(z)
                                                                     : individual_fit(*f, zv, cv, alpha, kernel, bandwidth, z);
                        evals = solve_all(set, forms);
                        coverage = set_coverage(set, samples);
                        break;
                    }
                    case Method::Ellipsoid:
                        for (const auto& sol : st.fixed_solutions) evals.push_back({sol.x, sol.worst_case_value});
                        coverage = set_coverage(*st.fixed_set, samples);
                        break;
                    case Method::Knn:
                        if (!knn_cache) {
                            auto set = baseline_knn(inst.data.Z, costs, alpha, z);
                            auto e = solve_all(set, forms);
                            knn_cache.emplace(std::move(set), std::move(e));
                        }
                        evals = knn_cache->second;
                        coverage = set_coverage(knn_cache->first, samples);
                        break;
                    case Method::Dro:
                        if (!dro_cache) {
                            DroConfig dcfg;
                            dcfg.bandwidth = bandwidth;
                            dro_cache = solve_all(dro_ball(*f, zv, cv, z, dcfg, kernel), forms);
                        }
                        evals = *dro_cache;
                        coverage = guarantee_coverage(evals, samples);
                        break;
                    case Method::Cvar:
                        if (!scenarios)
                            scenarios = sample_conditional(*f, zv, cv, kernel, bandwidth, z, cfg.cvar_samples,
                                                           derive_seed(trial_seed, "cvar", static_cast<std::uint64_t>(j)));
                        for (const auto& sf : forms) {
                            const auto sol = solve_cvar_lp(*scenarios, alpha, sf);
                            require(sol.optimal(), ErrorCode::NumericalBreakdown, "cvar solve did not reach optimality");
                            evals.push_back({sol.x, sol.value});
                        }
                        coverage = guarantee_coverage(evals, samples);
                        break;
                    }
                    double var = 0.0;
                    double opt = 0.0;
                    for (const auto& e : evals) {
                        var += estimate_var(e.x, samples, alpha);
                        opt += e.opt;
                    }
                    cell.var += var / static_cast<double>(evals.size());
                    cell.opt += opt / static_cast<double>(evals.size());
                    cell.coverage += coverage;
                    ++cell.count;
                } catch (const std::exception& e) {
                    cell.failed = true;
                    cell.error = e.what();
                }
            }
        }
    }
    return cells;
}

}  // namespace detail

/**
 * Per trial: fresh instance (model from cfg.seed, samples from the trial
 * stream), 60/40 learn/validation split, f fitted on the learn part, methods
 * calibrated on the validation part (split again in half inside ptc-b/ptc-e),
 * then VaR, OPT and coverage over test covariates with var_samples cost draws
 * each. Every random stream derives from (seed, trial, purpose), so rows do
 * not depend on the worker count.
 */
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto trials = static_cast<std::size_t>(cfg.trials);
    std::vector<std::vector<detail::CellTotals>> outcomes(trials);
    parallel_for(trials, cfg.jobs, [&](std::size_t t) { outcomes[t] = detail::run_trial(cfg, static_cast<int>(t)); });

    ExperimentReport report;
    report.config = cfg;
    const std::size_t M = cfg.methods.size();
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
        for (std::size_t m = 0; m < M; ++m) {
            ReportRow row;
            row.alpha = cfg.alphas[a];
            row.method = cfg.methods[m];
            row.seed = cfg.seed;
            double var = 0.0, opt = 0.0, cov = 0.0;
            for (const auto& cells : outcomes) {
                const auto& c = cells[a * M + m];
                if (c.failed || c.count == 0) {
                    ++row.failures;
                    if (row.error.empty()) row.error = c.failed ? c.error : "no test covariates";
                    continue;
                }
                const auto n = static_cast<double>(c.count);
                var += c.var / n;
                opt += c.opt / n;
                cov += c.coverage / n;
                ++row.trials;
            }
            const double k = row.trials > 0 ? row.trials : std::numeric_limits<double>::quiet_NaN();
            row.avg_var = var / k;
            row.avg_opt = opt / k;
            row.avg_coverage = cov / k;
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

inline std::string format_report_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline constexpr const char* kReportHeader = "alpha,method,avg_var,avg_opt,avg_coverage,trials,seed";

inline void write_report_csv(std::ostream& os, const ExperimentReport& report) {
    os << kReportHeader << '\n';
    for (const auto& r : report.rows) {
        os << format_report_number(r.alpha) << ',' << to_string(r.method) << ',' << format_report_number(r.avg_var)
           << ',' << format_report_number(r.avg_opt) << ',' << format_report_number(r.avg_coverage) << ','
           << r.trials << ',' << r.seed << '\n';
    }
}

}  // namespace ptc
