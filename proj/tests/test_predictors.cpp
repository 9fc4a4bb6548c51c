#include "ptc/predictors/predictor.hpp"
#include "ptc/predictors/quantile.hpp"
#include "ptc/predictors/serialize.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace ptc;

namespace {

Dataset random_dataset(std::uint64_t seed, Index T, Index d, Index n) {
    Rng rng(seed);
    Dataset data{Matrix(T, d), Matrix(T, n)};
    for (Index t = 0; t < T; ++t) {
        for (Index j = 0; j < d; ++j) data.Z(t, j) = rng.normal();
        for (Index i = 0; i < n; ++i) data.C(t, i) = data.Z(t, i % d) * (i + 1) + 0.3 * rng.normal();
    }
    return data;
}

MlpConfig small_mlp() {
    MlpConfig cfg;
    cfg.hidden = {8};
    cfg.epochs = 20;
    cfg.batch_size = 16;
    cfg.learning_rate = 1e-2;
    return cfg;
}

}  // namespace

TEST(Ridge, RecoversExactSlope) {
    Dataset data{Matrix(10, 1), Matrix(10, 1)};
    for (Index t = 0; t < 10; ++t) {
        data.Z(t, 0) = static_cast<double>(t);
        data.C(t, 0) = 2.0 * static_cast<double>(t);
    }
    PredictorConfig cfg;
    cfg.ridge_lambda = 1e-10;
    const auto p = fit_predictor(data, cfg, 0);
    EXPECT_NEAR(p.weights(0, 0), 2.0, 1e-6);
    EXPECT_NEAR(p.intercept(0), 0.0, 1e-6);
}

TEST(Ridge, HugeLambdaShrinksWeights) {
    const auto data = random_dataset(1, 50, 3, 2);
    PredictorConfig cfg;
    cfg.ridge_lambda = 1e12;
    const auto p = fit_predictor(data, cfg, 0);
    EXPECT_LE(p.weights.norm(), 1e-6 * std::max(1.0, data.C.cwiseAbs().maxCoeff()));
}

TEST(Ridge, SatisfiesNormalEquations) {
    const auto data = random_dataset(2, 40, 3, 4);
    PredictorConfig cfg;
    cfg.ridge_lambda = 0.7;
    const auto p = fit_predictor(data, cfg, 0);
    const Matrix zc = data.Z.rowwise() - data.Z.colwise().mean();
    const Matrix cc = data.C.rowwise() - data.C.colwise().mean();
    const Matrix lhs = (zc.transpose() * zc + 0.7 * Matrix::Identity(3, 3)) * p.weights;
    EXPECT_LT((lhs - zc.transpose() * cc).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Ridge, NegativeLambdaRejected) {
    PredictorConfig cfg;
    cfg.ridge_lambda = -1.0;
    try {
        fit_predictor(random_dataset(3, 10, 2, 1), cfg, 0);
        FAIL() << "expected ConfigInvalid";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
    }
}

TEST(KernelRidge, InterpolatesAtVanishingRegularization) {
    // Noise-free smooth targets; the residual bias lambda/(lambda + eig) stays tiny.
    auto data = random_dataset(4, 25, 2, 2);
    for (Index t = 0; t < 25; ++t) {
        data.C(t, 0) = std::sin(data.Z(t, 0)) + data.Z(t, 1);
        data.C(t, 1) = std::cos(data.Z(t, 1));
    }
    PredictorConfig cfg;
    cfg.kind = PredictorKind::KernelRidgeRbf;
    cfg.ridge_lambda = 1e-10;
    const auto p = fit_predictor(data, cfg, 0);
    EXPECT_LT((p.predict_rows(data.Z) - data.C).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Predict, LinearExampleAndDimensionCheck) {
    Matrix w(2, 1);
    w << 1, 0;
    const auto p = Predictor::linear(w, Vector::Zero(1));
    Vector z(2);
    z << 3, 5;
    EXPECT_DOUBLE_EQ(predict(p, z)(0), 3.0);
    EXPECT_THROW(predict(p, Vector::Zero(3)), Error);
}

TEST(Predict, ZeroWeightMlpReturnsBias) {
    DenseLayer hidden{Matrix::Zero(4, 3), Vector::Zero(4)};
    Vector bias(2);
    bias << 1.5, -2.0;
    DenseLayer out{Matrix::Zero(2, 4), bias};
    const auto p = Predictor::mlp(Mlp::from_layers({hidden, out}));
    EXPECT_EQ(p.predict(Vector::Ones(3)), bias);
}

TEST(Predict, FittingAndPredictionAreDeterministic) {
    const auto data = random_dataset(5, 60, 3, 2);
    for (auto kind : {PredictorKind::Linear, PredictorKind::KernelRidgeRbf, PredictorKind::Mlp}) {
        PredictorConfig cfg;
        cfg.kind = kind;
        cfg.mlp = small_mlp();
        const auto a = fit_predictor(data, cfg, 17);
        const auto b = fit_predictor(data, cfg, 17);
        const Vector z = data.Z.row(3).transpose();
        EXPECT_EQ(a.predict(z), a.predict(z));
        EXPECT_EQ(a.predict(z), b.predict(z));
    }
}

TEST(Mlp, TrainingReducesLoss) {
    const auto data = random_dataset(6, 200, 2, 1);
    MlpConfig cfg = small_mlp();
    cfg.epochs = 60;
    const auto net = train_mlp(data.Z, data.C, Loss{}, cfg, 1);
    ASSERT_EQ(net.epoch_loss.size(), 60u);
    EXPECT_LT(net.epoch_loss.back(), 0.5 * net.epoch_loss.front());
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
    // 1 input -> 1 tanh unit -> 1 output: weights w0, w1 and bias b1 are checked
    // alongside the hidden bias.
    auto make = [](double w0, double b0, double w1, double b1) {
        return Mlp::from_layers({DenseLayer{Matrix::Constant(1, 1, w0), Vector::Constant(1, b0)},
                                 DenseLayer{Matrix::Constant(1, 1, w1), Vector::Constant(1, b1)}});
    };
    Matrix x(1, 5);
    x << -1.0, -0.3, 0.2, 0.8, 1.5;
    Matrix y(1, 5);
    y << 0.9, -0.7, 1.2, -0.4, 2.0;
    const double p0[4] = {0.7, -0.2, 1.3, 0.1};
    for (const Loss loss : {Loss{LossKind::Squared, 0.5}, Loss{LossKind::Pinball, 0.8}}) {
        const Mlp net = make(p0[0], p0[1], p0[2], p0[3]);
        const auto out = net.forward_scaled(x);
        ASSERT_GT((y - out).cwiseAbs().minCoeff(), 1e-3);
        const auto g = detail::mlp_loss_gradient(net, x, y, loss);
        const double analytic[4] = {g.grads[0].weight(0, 0), g.grads[0].bias(0), g.grads[1].weight(0, 0),
                                    g.grads[1].bias(0)};
        for (int k = 0; k < 4; ++k) {
            double up[4] = {p0[0], p0[1], p0[2], p0[3]};
            double dn[4] = {p0[0], p0[1], p0[2], p0[3]};
            up[k] += 1e-5;
            dn[k] -= 1e-5;
            const double fu = detail::mlp_loss_gradient(make(up[0], up[1], up[2], up[3]), x, y, loss).loss;
            const double fd = detail::mlp_loss_gradient(make(dn[0], dn[1], dn[2], dn[3]), x, y, loss).loss;
            const double numeric = (fu - fd) / 2e-5;
            EXPECT_LE(std::abs(numeric - analytic[k]), 1e-4 * std::max(1.0, std::abs(analytic[k])))
                << "param " << k;
        }
    }
}

TEST(Quantile, ConstantTargets) {
    const auto data = random_dataset(7, 50, 2, 1);
    const Matrix targets = Matrix::Constant(50, 3, 2.0);
    for (double alpha : {0.1, 0.5, 0.9}) {
        for (auto kind : {QuantileKind::LinearPinball, QuantileKind::MlpPinball}) {
            QuantileConfig cfg;
            cfg.kind = kind;
            cfg.mlp = small_mlp();
            const auto q = fit_quantile(data.Z, targets, alpha, cfg, 3);
            for (Index t = 0; t < 50; ++t) {
                const Vector v = q.predict(data.Z.row(t).transpose());
                EXPECT_LT((v.array() - 2.0).abs().maxCoeff(), 1e-3) << "alpha " << alpha;
            }
        }
    }
}

TEST(Quantile, EmpiricalQuantileOfOneToHundred) {
    Matrix z = Matrix::Ones(100, 1);
    Matrix y(100, 1);
    for (Index t = 0; t < 100; ++t) y(t, 0) = static_cast<double>(t + 1);
    const auto q = fit_quantile(z, y, 0.9, QuantileConfig{}, 0);
    const double v = q.predict(Vector::Ones(1))(0);
    EXPECT_GE(v, 89.0);
    EXPECT_LE(v, 91.0);
}

TEST(Quantile, MedianOfSymmetricPair) {
    Matrix z = Matrix::Ones(2, 1);
    Matrix y(2, 1);
    y << -1, 1;
    QuantileConfig cfg;
    cfg.floor = 1e-9;
    const auto q = fit_quantile(z, y, 0.5, cfg, 0);
    QuantileModel raw = q;
    raw.floor = -kInf;
    const double v = raw.predict(Vector::Ones(1))(0);
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
    EXPECT_NEAR(pinball_loss(y, Matrix::Constant(2, 1, v), 0.5) * 2.0, 1.0, 1e-9);
}

TEST(Quantile, PredictionsRespectFloor) {
    const auto data = random_dataset(8, 80, 2, 2);
    const Matrix targets = -data.C.cwiseAbs();
    QuantileConfig cfg;
    cfg.floor = 1e-3;
    for (auto kind : {QuantileKind::LinearPinball, QuantileKind::MlpPinball}) {
        cfg.kind = kind;
        cfg.mlp = small_mlp();
        const auto q = fit_quantile(data.Z, targets, 0.7, cfg, 9);
        Rng rng(4);
        for (int i = 0; i < 200; ++i) {
            Vector z(2);
            z << 10 * rng.normal(), 10 * rng.normal();
            EXPECT_GE(q.predict(z).minCoeff(), 1e-3);
        }
    }
}

TEST(Quantile, RejectsBadAlpha) {
    EXPECT_THROW(fit_quantile(Matrix::Ones(3, 1), Matrix::Ones(3, 1), 1.0, QuantileConfig{}, 0), Error);
    EXPECT_THROW(fit_quantile(Matrix::Ones(3, 1), Matrix::Ones(3, 1), 0.0, QuantileConfig{}, 0), Error);
}

TEST(Serialize, RoundTripsAllModelKinds) {
    const auto data = random_dataset(10, 30, 3, 2);
    for (auto kind : {PredictorKind::Linear, PredictorKind::KernelRidgeRbf, PredictorKind::Mlp}) {
        PredictorConfig cfg;
        cfg.kind = kind;
        cfg.mlp = small_mlp();
        const auto p = fit_predictor(data, cfg, 2);
        std::stringstream ss;
        save_predictor(ss, p);
        const auto back = load_predictor(ss);
        const Vector z = data.Z.row(0).transpose();
        EXPECT_EQ(p.predict(z), back.predict(z));
    }
    for (auto kind : {QuantileKind::LinearPinball, QuantileKind::MlpPinball}) {
        QuantileConfig cfg;
        cfg.kind = kind;
        cfg.mlp = small_mlp();
        const auto q = fit_quantile(data.Z, data.C.cwiseAbs(), 0.8, cfg, 5);
        std::stringstream ss;
        write_record(ss, to_record(q));
        const auto back = quantile_from_record(read_record(ss));
        const Vector z = data.Z.row(1).transpose();
        EXPECT_EQ(q.predict(z), back.predict(z));
    }
}

TEST(Serialize, RejectsForeignInput) {
    std::stringstream ss("hello world\n");
    EXPECT_THROW(read_record(ss), Error);
    std::stringstream trunc("ptc-record 1 predictor\nscalar input_dim 2\n");
    EXPECT_THROW(read_record(trunc), Error);
}
