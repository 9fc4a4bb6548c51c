#pragma once

#include "ptc/bench/experiment.hpp"
#include "ptc/bench/report.hpp"
#include "ptc/problems/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace ptc::cli {

enum ExitCode : int { kOk = 0, kIo = 1, kUsage = 2, kExperimentFailed = 3 };

namespace detail {

/// Usage errors map to 2, file-system and IO failures to 1.
inline int exit_for(const Error& e) {
    return e.code() == ErrorCode::IoError ? kIo : kUsage;
}

/// PTC_SEED when set; a malformed value is a usage error.
inline std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("PTC_SEED");
    if (!s || !*s) return std::nullopt;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used == std::string(s).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::ConfigInvalid, "PTC_SEED must be an unsigned integer");
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, "'" + path + "': " + e.what());
    }
}

struct GenFlags {
    std::string problem;
    Index T = 1000;
    Index d = 10;
    Index n = 20;
    std::uint64_t seed = 0;
    std::string out = ".";
};

struct RunFlags {
    std::string config;
    std::string problem;
    std::vector<std::string> methods;
    std::vector<double> alphas;
    Index T = 0, d = 0, n = 0, tests = 0, var_samples = 0, cvar_samples = 0;
    int trials = 0;
    std::string predictor, quantile;
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    std::string out;
};

inline int cmd_gen(const GenFlags& f, const CLI::App& sub, std::ostream& out) {
    const ProblemKind kind = problem_kind_from_string(f.problem);
    require(f.T >= 1, ErrorCode::ConfigInvalid, "--T must be >= 1");
    require(f.d >= (kind == ProblemKind::Toy ? 1 : 3), ErrorCode::ConfigInvalid, "--d is too small for this problem");
    require(kind != ProblemKind::Knapsack || f.n >= 2, ErrorCode::ConfigInvalid, "--n must be >= 2");
    std::uint64_t seed = f.seed;
    if (sub.count("--seed") == 0) seed = env_seed().value_or(0);
    const auto inst = make_instance(kind, f.T, f.d, f.n, seed, seed);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(f.out, ec);
    require(!ec, ErrorCode::IoError, "cannot create '" + f.out + "': " + ec.message());
    const fs::path base = fs::path(f.out) / std::string(to_string(kind));
    const std::string csv = base.string() + ".csv";
    const std::string meta = base.string() + ".meta.json";
    {
        std::ofstream os(csv, std::ios::binary);
        require(static_cast<bool>(os), ErrorCode::IoError, "cannot write '" + csv + "'");
        write_dataset_csv(os, inst.data);
        require(static_cast<bool>(os), ErrorCode::IoError, "write failed for '" + csv + "'");
    }
    {
        std::ofstream os(meta, std::ios::binary);
        require(static_cast<bool>(os), ErrorCode::IoError, "cannot write '" + meta + "'");
        os << instance_meta(inst).dump(2) << '\n';
        require(static_cast<bool>(os), ErrorCode::IoError, "write failed for '" + meta + "'");
    }
    out << csv << '\n' << meta << '\n';
    return kOk;
}

/// Defaults, then PTC_SEED, then the config file, then explicit flags.
inline ExperimentConfig resolve_run_config(const RunFlags& f, const CLI::App& sub) {
    ExperimentConfig cfg;
    if (auto s = env_seed()) cfg.seed = *s;
    if (!f.config.empty()) cfg = experiment_config_from_json(read_json_file(f.config), cfg);
    nlohmann::json j = nlohmann::json::object();
    auto given = [&](const char* flag) { return sub.count(flag) > 0; };
    if (given("--problem")) j["problem"] = f.problem;
    if (given("--methods")) j["methods"] = f.methods;
    if (given("--alphas")) j["alphas"] = f.alphas;
    if (given("--T")) j["T"] = f.T;
    if (given("--d")) j["d"] = f.d;
    if (given("--n")) j["n"] = f.n;
    if (given("--trials")) j["trials"] = f.trials;
    if (given("--tests")) j["tests"] = f.tests;
    if (given("--var-samples")) j["var-samples"] = f.var_samples;
    if (given("--cvar-samples")) j["cvar-samples"] = f.cvar_samples;
    if (given("--predictor")) j["predictor"] = f.predictor;
    if (given("--quantile")) j["quantile"] = f.quantile;
    if (given("--seed")) j["seed"] = f.seed;
    if (given("--jobs")) j["jobs"] = f.jobs;
    cfg = experiment_config_from_json(j, cfg);
    cfg.validate();
    return cfg;
}

inline int cmd_run(const RunFlags& f, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = resolve_run_config(f, sub);
    const ExperimentReport report = run_experiment(cfg);
    if (f.out.empty() || f.out == "-") {
        write_report_csv(out, report);
    } else {
        std::ofstream os(f.out, std::ios::binary);
        require(static_cast<bool>(os), ErrorCode::IoError, "cannot write '" + f.out + "'");
        write_report_csv(os, report);
        require(static_cast<bool>(os), ErrorCode::IoError, "write failed for '" + f.out + "'");
    }
    for (const auto& r : report.rows)
        if (r.failures > 0)
            err << "warning: " << to_string(r.method) << " at alpha " << format_report_number(r.alpha) << " failed "
                << r.failures << " of " << cfg.trials << " trials: " << r.error << '\n';
    return report.any_method_failed_everywhere() ? kExperimentFailed : kOk;
}

inline int cmd_table(const std::string& path, std::ostream& out) {
    std::vector<ReportCells> rows;
    if (path == "-") {
        rows = read_report_csv(std::cin);
    } else {
        std::ifstream in(path, std::ios::binary);
        require(static_cast<bool>(in), ErrorCode::IoError, "cannot open '" + path + "'");
        rows = read_report_csv(in);
    }
    out << format_report_table(rows);
    return kOk;
}

}  // namespace detail

/// Entry point; args excludes the program name. Returns the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Predict-then-calibrate robust contextual LP toolkit", "ptc"};
    app.require_subcommand(1);

    detail::GenFlags gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic dataset as <out>/<problem>.csv plus a .meta.json sidecar");
    g->add_option("--problem", gen.problem, "toy | shortest-path | knapsack")->required();
    g->add_option("--T", gen.T, "Number of samples")->capture_default_str();
    g->add_option("--d", gen.d, "Covariate dimension")->capture_default_str();
    g->add_option("--n", gen.n, "Knapsack item count")->capture_default_str();
    g->add_option("--seed", gen.seed, "Seed; falls back to PTC_SEED, then 0");
    g->add_option("--out", gen.out, "Output directory")->capture_default_str();

    detail::RunFlags run;
    auto* r = app.add_subcommand("run", "Run the benchmark and write the report CSV");
    r->add_option("--config", run.config, "JSON config whose keys mirror the flag names; flags override it");
    r->add_option("--problem", run.problem, "toy | shortest-path | knapsack (default shortest-path)");
    r->add_option("--methods", run.methods, "Comma list of ptc-b, ptc-e, ellipsoid, knn, dro, individual, cvar")
        ->delimiter(',');
    r->add_option("--alphas", run.alphas, "Comma list of target levels in (0,1); required here or in --config")
        ->delimiter(',');
    r->add_option("--T", run.T, "Samples per trial (default 1000)");
    r->add_option("--d", run.d, "Covariate dimension (default 10)");
    r->add_option("--n", run.n, "Knapsack item count (default 20)");
    r->add_option("--trials", run.trials, "Independent trials (default 20)");
    r->add_option("--tests", run.tests, "Test covariates per trial; 0 means 500, or 100 for knapsack");
    r->add_option("--var-samples", run.var_samples, "Cost draws per test covariate for VaR (default 1000)");
    r->add_option("--cvar-samples", run.cvar_samples, "Resampled scenarios per CVaR program (default 100)");
    r->add_option("--predictor", run.predictor, "linear | kernel-ridge-rbf | mlp (default kernel-ridge-rbf)");
    r->add_option("--quantile", run.quantile, "linear-pinball | mlp-pinball (default mlp-pinball)");
    r->add_option("--seed", run.seed, "Seed; falls back to the config, then PTC_SEED, then 0");
    r->add_option("--jobs", run.jobs, "Worker threads; 0 means all cores (default 1)");
    r->add_option("--out", run.out, "Report CSV path; standard output when omitted or '-'");

    std::string table_path;
    auto* t = app.add_subcommand("table", "Print a report CSV as aligned VaR and coverage tables");
    t->add_option("csv", table_path, "Report CSV path, or '-' for standard input")->required();

    const std::string codes = "Exit codes: 0 success, 1 IO failure, 2 usage error, 3 a method failed on every trial.";
    for (auto* a : {&app, g, r, t}) a->footer(codes);

    std::vector<std::string> argv_store{"ptc"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    CLI::App* active = g->parsed() ? g : r->parsed() ? r : t;
    try {
        if (active == g) return detail::cmd_gen(gen, *g, out);
        if (active == r) return detail::cmd_run(run, *r, out, err);
        return detail::cmd_table(table_path, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (detail::exit_for(e) == kUsage) err << "Run 'ptc " << active->get_name() << " --help' for usage.\n";
        return detail::exit_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return active == r ? kExperimentFailed : kIo;
    }
}

}  // namespace ptc::cli
