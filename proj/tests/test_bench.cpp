#include "ptc/bench/baselines.hpp"
#include "ptc/bench/experiment.hpp"
#include "ptc/bench/metrics.hpp"
#include "ptc/bench/parallel.hpp"
#include "ptc/bench/report.hpp"
#include "ptc/calibrate/conformal.hpp"
#include "ptc/robust/robust_lp.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace ptc;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

Matrix normal_rows(Index T, Index n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(T, n);
    for (Index t = 0; t < T; ++t)
        for (Index i = 0; i < n; ++i) m(t, i) = rng.normal();
    return m;
}

std::string report_csv(const ExperimentReport& r) {
    std::ostringstream os;
    write_report_csv(os, r);
    return os.str();
}

}  // namespace

TEST(Var, OrderStatisticExamples) {
    std::vector<double> costs(10);
    for (int i = 0; i < 10; ++i) costs[static_cast<std::size_t>(i)] = 10 - i;
    EXPECT_EQ(estimate_var(costs, 0.8), 8.0);
    EXPECT_EQ(estimate_var(costs, 0.7), 7.0);
    EXPECT_EQ(estimate_var(costs, 1.0), 10.0);
    EXPECT_EQ(estimate_var(costs, 0.999), 10.0);
    EXPECT_EQ(estimate_var(costs, 0.01), 1.0);
    EXPECT_EQ(estimate_var(std::vector<double>(7, 3.5), 0.3), 3.5);
    EXPECT_THROW(estimate_var(std::vector<double>{}, 0.5), Error);
    EXPECT_THROW(estimate_var(costs, 0.0), Error);
}

TEST(Var, ConstantSamplerGivesTheConstant) {
    Matrix samples = vec({2, -1}).transpose().replicate(50, 1);
    EXPECT_DOUBLE_EQ(estimate_var(vec({3, 1}), samples, 0.9), 5.0);
}

TEST(Var, MonotoneInAlpha) {
    const Matrix s = normal_rows(500, 3, 11);
    const Vector x = vec({1, -2, 0.5});
    double prev = -kInf;
    for (double a = 0.05; a <= 1.0; a += 0.05) {
        const double v = estimate_var(x, s, a);
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(Var, GeneratorSamplerMatchesNormalQuantile) {
    const auto inst = gen_toy(10, 3, 1);
    Rng zr(2);
    const Vector z = inst.model.sample_z(zr);
    Rng rng(3);
    const Vector x = vec({1});
    const double v = estimate_var(x, z, inst.model, 0.5, 20000, rng);
    Rng mr(4);
    std::vector<double> ref(20000);
    for (auto& c : ref) c = inst.model.sample_cost(z, mr)(0);
    EXPECT_NEAR(v, estimate_var(ref, 0.5), 0.05);
}

TEST(Coverage, Examples) {
    const Matrix Z = Matrix::Zero(4, 1);
    Matrix C(4, 1);
    C << 0.0, 0.5, 0.9, 2.0;
    const auto unit = [](const Vector&) { return UncertaintySet::box(vec({0}), vec({1})); };
    const auto tiny = [](const Vector&) { return UncertaintySet::box(vec({5}), vec({6})); };
    const auto wide = [](const Vector&) { return UncertaintySet::box(vec({-10}), vec({10})); };
    EXPECT_DOUBLE_EQ(estimate_coverage(wide, Z, C), 1.0);
    EXPECT_DOUBLE_EQ(estimate_coverage(tiny, Z, C), 0.0);
    EXPECT_DOUBLE_EQ(estimate_coverage(unit, Z, C), 0.75);
    EXPECT_DOUBLE_EQ(set_coverage(unit(Vector()), C), 0.75);
}

TEST(Coverage, UsesTheCovariateOfEachRow) {
    Matrix Z(3, 1);
    Z << 0, 1, 2;
    Matrix C(3, 1);
    C << 0, 1, 5;
    const auto around = [](const Vector& z) { return UncertaintySet::box(z, z); };
    EXPECT_NEAR(estimate_coverage(around, Z, C), 2.0 / 3.0, 1e-15);
}

TEST(Ellipsoid, TrainingCoverageIsTheOrderStatisticRank) {
    const Matrix C = normal_rows(403, 3, 5);
    for (double a : {0.5, 0.8, 0.9, 1.0}) {
        const auto set = baseline_ellipsoid(C, a);
        const double expected = static_cast<double>(order_statistic_rank(a, 403)) / 403.0;
        EXPECT_NEAR(set_coverage(set, C), expected, 1.0 / 403.0 + 1e-12);
        EXPECT_GE(set_coverage(set, C), expected - 1e-12);
    }
}

TEST(Ellipsoid, RadiusApproachesChiQuantile) {
    const Matrix C = normal_rows(20000, 2, 6);
    const auto set = baseline_ellipsoid(C, 0.8);
    EXPECT_NEAR(set.radius, std::sqrt(-2.0 * std::log(0.2)), 0.05 * std::sqrt(-2.0 * std::log(0.2)));
}

TEST(Ellipsoid, RejectsTooFewSamples) {
    EXPECT_THROW(baseline_ellipsoid(normal_rows(3, 3, 1), 0.8), Error);
}

TEST(Knn, SizeRule) {
    EXPECT_EQ(knn_size(1000, 1), 32);
    EXPECT_EQ(knn_size(1000, 40), 80);
    EXPECT_EQ(knn_size(100, 5), 10);
}

TEST(Knn, ContainsEveryNeighbour) {
    const Matrix Z = normal_rows(300, 2, 7);
    const Matrix C = normal_rows(300, 3, 8);
    const Vector z0 = vec({0.2, -0.4});
    const auto set = baseline_knn(Z, C, 0.8, z0);
    const auto idx = nearest_rows(Z, z0, knn_size(300, 3));
    ASSERT_EQ(idx.size(), 18u);
    for (Index t : idx) EXPECT_TRUE(set.contains(C.row(t).transpose()));
    const double far = (Z.rowwise() - z0.transpose()).rowwise().norm().maxCoeff();
    for (Index t : idx) EXPECT_LE((Z.row(t).transpose() - z0).norm(), far);
}

TEST(Knn, AllRowsMatchesEllipsoidAtFullLevel) {
    const Matrix Z = normal_rows(60, 2, 9);
    const Matrix C = normal_rows(60, 3, 10);
    const auto knn = baseline_knn(Z, C, 0.8, vec({0, 0}), 60);
    const auto ell = baseline_ellipsoid(C, 1.0);
    EXPECT_NEAR(knn.radius, ell.radius, 1e-12);
    EXPECT_LT((knn.center - ell.center).norm(), 1e-12);
}

TEST(Knn, TiesGoToLowerIndex) {
    Matrix Z(5, 1);
    Z << 1, -1, 1, 0, -1;
    const auto idx = nearest_rows(Z, vec({0}), 3);
    EXPECT_EQ(idx, (std::vector<Index>{3, 0, 1}));
}

TEST(Parallel, VisitsEveryIndexOnceAndRethrows) {
    std::vector<int> hits(97, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                     if (i == 7) throw Error(ErrorCode::ConfigInvalid, "boom");
                 }),
                 Error);
    EXPECT_EQ(resolve_jobs(8, 3), 3u);
    EXPECT_GE(resolve_jobs(0, 100), 1u);
}

TEST(Calibration, OptimalValueNondecreasingInAlpha) {
    const auto inst = gen_shortest_path(600, 5, 3);
    PredictorConfig pc;
    pc.kind = PredictorKind::Linear;
    const auto f = std::make_shared<const Predictor>(fit_predictor(inst.data, pc, 1));
    const auto sf = to_standard_form(inst.constraint_sets[0]);
    QuantileConfig qc;
    qc.kind = QuantileKind::LinearPinball;
    const auto box = buq_fit(f, inst.data.Z, inst.data.C, 0.5, 0.5, qc, 2);
    const auto ell = euq_fit(f, inst.data.Z, inst.data.C, 0.5, 0.5, qc, 2);
    Rng rng(4);
    for (int k = 0; k < 5; ++k) {
        const Vector z = inst.model.sample_z(rng);
        double prev_b = -kInf, prev_e = -kInf;
        for (double a : {0.5, 0.6, 0.7, 0.8, 0.9}) {
            const double vb = solve_robust(box.with_alpha(a).set_at(z), sf).worst_case_value;
            const double ve = solve_robust(ell.with_alpha(a).set_at(z), sf).worst_case_value;
            EXPECT_GE(vb, prev_b - 1e-9 * std::max(1.0, std::abs(vb)));
            EXPECT_GE(ve, prev_e - 1e-4 * std::max(1.0, std::abs(ve)));
            prev_b = vb;
            prev_e = ve;
        }
    }
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
    ExperimentConfig c;
    c.problem = ProblemKind::Knapsack;
    c.methods = {Method::PtcE, Method::Cvar};
    c.alphas = {0.7, 0.9};
    c.T = 321;
    c.seed = 99;
    c.jobs = 3;
    const auto back = experiment_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"alpha": [0.8]})")), Error);
    EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"T": "big"})")), Error);
    EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"([1,2])")), Error);
    const auto partial = experiment_config_from_json(nlohmann::json::parse(R"({"trials": 4})"), c);
    EXPECT_EQ(partial.trials, 4);
    EXPECT_EQ(partial.T, 321);
}

TEST(Config, ValidationRejectsBadValues) {
    ExperimentConfig c;
    c.methods = {Method::PtcB};
    c.alphas = {0.8};
    EXPECT_NO_THROW(c.validate());
    auto bad = c;
    bad.alphas = {1.0};
    EXPECT_THROW(bad.validate(), Error);
    bad = c;
    bad.methods = {Method::PtcB, Method::PtcB};
    EXPECT_THROW(bad.validate(), Error);
    bad = c;
    bad.T = 5;
    EXPECT_THROW(bad.validate(), Error);
    EXPECT_THROW(method_from_string("ptc-x"), Error);
    for (Method m : {Method::PtcB, Method::PtcE, Method::Ellipsoid, Method::Knn, Method::Dro, Method::Individual,
                     Method::Cvar})
        EXPECT_EQ(method_from_string(to_string(m)), m);
}

TEST(Experiment, ToyEllipsoidCoverageNearAlpha) {
    ExperimentConfig c;
    c.problem = ProblemKind::Toy;
    c.methods = {Method::Ellipsoid};
    c.alphas = {0.8};
    c.T = 1000;
    c.d = 3;
    c.trials = 3;
    c.tests = 200;
    c.var_samples = 200;
    const auto r = run_experiment(c);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.rows[0].trials, 3);
    EXPECT_GE(r.rows[0].avg_coverage, 0.75);
    EXPECT_LE(r.rows[0].avg_coverage, 0.85);
}

TEST(Experiment, RowsAreAlphaMajorAndIndependentOfJobs) {
    ExperimentConfig c;
    c.problem = ProblemKind::Toy;
    c.methods = {Method::PtcB, Method::Ellipsoid, Method::Knn};
    c.alphas = {0.7, 0.9};
    c.T = 200;
    c.d = 3;
    c.trials = 4;
    c.tests = 30;
    c.var_samples = 100;
    c.quantile = QuantileKind::LinearPinball;
    c.seed = 17;
    c.jobs = 1;
    const auto serial = run_experiment(c);
    c.jobs = 4;
    const auto threaded = run_experiment(c);
    EXPECT_EQ(report_csv(serial), report_csv(threaded));
    ASSERT_EQ(serial.rows.size(), 6u);
    EXPECT_EQ(serial.rows[0].alpha, 0.7);
    EXPECT_EQ(serial.rows[2].method, Method::Knn);
    EXPECT_EQ(serial.rows[3].alpha, 0.9);
    for (const auto& row : serial.rows) EXPECT_EQ(row.seed, 17u);
    c.seed = 18;
    EXPECT_NE(report_csv(run_experiment(c)), report_csv(serial));
}

TEST(Experiment, MethodFailingEverywhereIsCountedPerMethod) {
    ExperimentConfig c;
    c.problem = ProblemKind::ShortestPath;
    c.methods = {Method::Knn, Method::Ellipsoid};
    c.alphas = {0.8};
    c.T = 30;
    c.d = 3;
    c.trials = 2;
    c.tests = 5;
    c.var_samples = 20;
    const auto r = run_experiment(c);
    ASSERT_EQ(r.rows.size(), 2u);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.trials, 0);
        EXPECT_EQ(row.failures, 2);
        EXPECT_TRUE(std::isnan(row.avg_var));
        EXPECT_FALSE(row.error.empty());
    }
    EXPECT_TRUE(r.any_method_failed_everywhere());
    EXPECT_NE(report_csv(r).find("0.8,knn,nan,nan,nan,0,0"), std::string::npos);
}

TEST(Report, CsvParsesAndFormatsTable) {
    std::istringstream in(std::string(kReportHeader) +
                          "\n0.8,ptc-b,1.5,2,0.81,20,0\n0.8,ellipsoid,3,4,0.8,20,0\n0.9,ptc-b,2,3,0.9,20,0\n");
    const auto rows = read_report_csv(in);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1].method, "ellipsoid");
    const auto table = format_report_table(rows);
    EXPECT_EQ(table,
              "Average VaR\n"
              "alpha  ptc-b  ellipsoid\n"
              "  0.8    1.5          3\n"
              "  0.9      2          -\n"
              "\n"
              "Average coverage\n"
              "alpha  ptc-b  ellipsoid\n"
              "  0.8   0.81        0.8\n"
              "  0.9    0.9          -\n");
}

TEST(Report, MalformedCsvIsRejected) {
    const auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return read_report_csv(in);
    };
    const std::string h = std::string(kReportHeader) + "\n";
    EXPECT_THROW(parse(""), Error);
    EXPECT_THROW(parse("a,b\n0.8,x\n"), Error);
    EXPECT_THROW(parse(h), Error);
    EXPECT_THROW(parse(h + "0.8,ptc-b,1,2,3\n"), Error);
    EXPECT_THROW(parse(h + "0.8,ptc-b,,2,3,4,5\n"), Error);
    EXPECT_NO_THROW(parse(h + "0.8,ptc-b,1,2,3,4,5\r\n"));
}
