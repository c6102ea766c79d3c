#include <gtest/gtest.h>

#include <qforge/data.hpp>
#include <qforge/library.hpp>
#include <qforge/training.hpp>

#include "test_util.hpp"

using namespace qforge;
using namespace qforge::testing_util;

namespace {

// Rotation gates each with a fresh parameter, interleaved with fixed entanglers.
ParameterizedCircuit rotation_only(int n, int num_rot, Rng& rng) {
    ParameterizedCircuit c(n);
    const GateKind rots[] = {GateKind::RX, GateKind::RY, GateKind::RZ};
    std::uniform_int_distribution<int> pick(0, 2), q(0, n - 1);
    int slot = 0;
    for (int i = 0; i < num_rot; ++i) {
        c.add(rots[pick(rng)], {q(rng)}, {slot++});
        if (n > 1 && i % 2 == 1) {
            const int a = q(rng);
            c.add(GateKind::CX, {a, (a + 1) % n});
        }
    }
    return c;
}

LabeledSet tiny_set(int count, Rng& rng) {
    LabeledSet s;
    for (int i = 0; i < count; ++i) {
        const int label = i % 2;
        Image img(4, 4, uniform_vector(rng, 16, 0.0, 0.3));
        if (label) for (auto& v : img.values) v += 2.5;
        s.images.push_back(img);
        s.labels.push_back(label);
    }
    return s;
}

Classifier tiny_model() { return make_classifier(hybrid_pyramid(HybridVariant::TypeII, "C2", 4)); }

}  // namespace

TEST(Bsoc, TargetsAtBinCenters) {
    Rng rng = make_rng(1);
    BsocSpec two{2, 0.0}, four{4, 0.0};
    EXPECT_DOUBLE_EQ(label_to_target(0, two, rng), 0.25);
    EXPECT_DOUBLE_EQ(label_to_target(1, two, rng), 0.75);
    EXPECT_DOUBLE_EQ(label_to_target(2, four, rng), 0.625);
    EXPECT_THROW(label_to_target(2, two, rng), std::out_of_range);
    EXPECT_THROW(label_to_target(-1, two, rng), std::out_of_range);
}

TEST(Bsoc, NoisyTargetsAreClampedAndCentered) {
    Rng rng = make_rng(2);
    BsocSpec loud{2, 0.5};
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double t = label_to_target(1, loud, rng);
        ASSERT_GE(t, 0.0);
        ASSERT_LE(t, 1.0);
    }
    BsocSpec quiet{2, 0.02};
    for (int i = 0; i < 20000; ++i) sum += label_to_target(0, quiet, rng);
    EXPECT_NEAR(sum / 20000, 0.25, 1e-3);
}

TEST(Bsoc, CentersInsideBins) {
    for (int n = 1; n <= 10; ++n) {
        BsocSpec s{n, 0.0};
        for (int c = 0; c < n; ++c) {
            EXPECT_GT(s.center(c), s.lower_edge(c));
            EXPECT_LT(s.center(c), s.lower_edge(c) + 1.0 / n);
            EXPECT_EQ(predict_class(s.center(c), s), c);
        }
    }
}

TEST(Mae, Examples) {
    const std::vector<double> a{0.25, 0.75}, b{0.75, 0.25};
    EXPECT_EQ(mae_loss(a, a), 0.0);
    EXPECT_DOUBLE_EQ(mae_loss(a, b), 0.5);
    EXPECT_NEAR(mae_loss(std::vector<double>{0.3}, std::vector<double>{0.1}), 0.2, 1e-15);
    EXPECT_THROW(mae_loss(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(mae_loss(a, std::vector<double>{0.1}), std::invalid_argument);
}

TEST(PredictClass, Examples) {
    BsocSpec two{2, 0.0}, four{4, 0.0};
    EXPECT_EQ(predict_class(0.6, two), 1);
    EXPECT_EQ(predict_class(0.5, two), 1);
    EXPECT_EQ(predict_class(0.0, four), 0);
    EXPECT_EQ(predict_class(1.0, four), 3);
    EXPECT_EQ(predict_class(0.25, four), 1);
    EXPECT_THROW(predict_class(1.01, two), std::domain_error);
    EXPECT_THROW(predict_class(-0.01, two), std::domain_error);
}

TEST(PredictClass, TotalOverUnitInterval) {
    BsocSpec s{3, 0.0};
    for (int i = 0; i <= 3000; ++i) {
        const int c = predict_class(i / 3000.0, s);
        ASSERT_GE(c, 0);
        ASSERT_LT(c, 3);
    }
}

TEST(FiniteDiff, ConstantAndLinear) {
    const std::vector<double> p{0.3, -1.2, 2.0};
    const auto zero = finite_diff_gradient([](std::span<const double>) { return 4.2; }, p, 0.1);
    for (double g : zero) EXPECT_EQ(g, 0.0);
    for (double eps : {1e-4, 0.1, 0.7}) {
        const auto lin = finite_diff_gradient([](std::span<const double> w) { return w[0]; }, p, eps);
        EXPECT_NEAR(lin[0], 1.0, 1e-9);
        EXPECT_EQ(lin[1], 0.0);
        EXPECT_EQ(lin[2], 0.0);
    }
    EXPECT_THROW(finite_diff_gradient([](std::span<const double>) { return 0.0; }, p, 0.0), std::invalid_argument);
}

TEST(FiniteDiff, ThreadCountDoesNotChangeGradient) {
    auto f = [](std::span<const double> w) { return std::sin(w[0]) * w[1] + w[2] * w[2]; };
    const std::vector<double> p{0.3, -1.2, 2.0};
    EXPECT_EQ(finite_diff_gradient(f, p, 0.1, 1), finite_diff_gradient(f, p, 0.1, 3));
}

TEST(FiniteDiff, MatchesParameterShiftOnRotationModels) {
    Rng rng = make_rng(3);
    for (int model = 0; model < 20; ++model) {
        const int n = 1 + model % 3;
        const auto c = rotation_only(n, 3 + model % 5, rng);
        const int readout = n - 1;
        auto loss = [&](std::span<const double> w) { return last_qubit_prob1(run_circuit(c, w, StateVector(n)), readout); };
        const auto p = random_params(c.num_params(), rng);
        const auto fd = finite_diff_gradient(loss, p, 1e-4);
        for (int j = 0; j < c.num_params(); ++j) {
            auto plus = p, minus = p;
            plus[static_cast<std::size_t>(j)] += pi / 2;
            minus[static_cast<std::size_t>(j)] -= pi / 2;
            const double shift = (loss(plus) - loss(minus)) / 2;
            ASSERT_NEAR(fd[static_cast<std::size_t>(j)], shift, 1e-3) << "model " << model << " param " << j;
        }
    }
}

TEST(Adam, ZeroGradientLeavesParams) {
    std::vector<double> p{1.0, -2.0};
    AdamState st(2);
    adam_step(st, p, std::vector<double>{0.0, 0.0}, 0.01);
    EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
}

TEST(Adam, FirstStepIsMinusLearningRateTimesSign) {
    std::vector<double> p{0.0, 0.0};
    AdamState st(2);
    adam_step(st, p, std::vector<double>{3.0, -0.5}, 0.01);
    // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps_hat)
    EXPECT_NEAR(p[0], -0.01 * 3.0 / (3.0 + 1e-8), 1e-15);
    EXPECT_NEAR(p[1], 0.01 * 0.5 / (0.5 + 1e-8), 1e-15);
}

TEST(Adam, ConstantGradientStepTendsToLearningRate) {
    std::vector<double> p{0.0};
    AdamState st(1);
    double prev = 0.0;
    for (int i = 0; i < 2000; ++i) {
        prev = p[0];
        adam_step(st, p, std::vector<double>{0.37}, 0.01);
    }
    EXPECT_NEAR(prev - p[0], 0.01, 1e-6);
}

TEST(Adam, ShapeMismatchThrows) {
    std::vector<double> p{0.0, 1.0};
    AdamState st(1);
    EXPECT_THROW(adam_step(st, p, std::vector<double>{0.0, 0.0}, 0.01), std::invalid_argument);
}

TEST(Train, ZeroBatchesKeepsInitialParams) {
    Rng rng = make_rng(4);
    const auto set = tiny_set(20, rng);
    TrainConfig cfg;
    cfg.num_batches = 0;
    const auto run = train(tiny_model(), set, set, cfg, 5);
    ASSERT_EQ(run.history.size(), 1u);
    EXPECT_EQ(run.history[0].batch, 0);
    EXPECT_EQ(run.final_params, run.initial_params);
}

TEST(Train, EvalPointsAtMultiplesAndDeterministic) {
    Rng rng = make_rng(5);
    const auto set = tiny_set(30, rng);
    TrainConfig cfg;
    cfg.num_batches = 45;
    cfg.batch_size = 5;
    const auto a = train(tiny_model(), set, set, cfg, 11);
    const auto b = train(tiny_model(), set, set, cfg, 11);
    ASSERT_EQ(a.history.size(), 3u);  // batches 0, 20, 40
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        EXPECT_EQ(a.history[i].batch, static_cast<int>(20 * i));
        EXPECT_GE(a.history[i].loss, 0.0);
        EXPECT_GE(a.history[i].accuracy, 0.0);
        EXPECT_LE(a.history[i].accuracy, 100.0);
    }
    EXPECT_EQ(to_json(a), to_json(b));
    const auto c = train(tiny_model(), set, set, cfg, 12);
    EXPECT_NE(c.final_params, a.final_params);
    cfg.threads = 2;
    EXPECT_EQ(to_json(train(tiny_model(), set, set, cfg, 11)), to_json(a));
}

TEST(Train, LearnsSeparableToyTask) {
    Rng rng = make_rng(6);
    const auto set = tiny_set(40, rng);
    TrainConfig cfg;
    cfg.num_batches = 100;
    cfg.learning_rate = 0.05;
    const auto run = train(tiny_model(), set, set, cfg, 1);
    EXPECT_LT(run.history.back().loss, run.history.front().loss);
}

TEST(Train, RejectsBadInput) {
    TrainConfig cfg;
    EXPECT_THROW(train(tiny_model(), LabeledSet{}, LabeledSet{}, cfg, 1), std::invalid_argument);
    cfg.batch_size = 0;
    Rng rng = make_rng(7);
    const auto set = tiny_set(4, rng);
    EXPECT_THROW(train(tiny_model(), set, set, cfg, 1), std::invalid_argument);
}

TEST(Evaluate, UntrainedModelIsNearChance) {
    const auto dir = data_dir(std::filesystem::path(QFORGE_SOURCE_DIR) / "data" / "mnist");
    const auto raw = load_idx_dir(dir);
    PrepareOptions opt;
    opt.train_per_class = 0;
    opt.test_per_class = 100;
    const auto data = prepare(raw, opt);
    const auto model = make_classifier(find_grid_model("U3-U3-U3-U3->C5"));
    double sum = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = make_rng(static_cast<std::uint64_t>(s), 11);
        const auto p = uniform_vector(rng, static_cast<std::size_t>(model.num_params), 0.0, 2 * pi);
        const auto e = evaluate(model, p, data.test, BsocSpec{});
        EXPECT_GE(e.loss, 0.0);
        sum += e.accuracy;
    }
    EXPECT_NEAR(sum / seeds, 50.0, 15.0);
}

TEST(TrainSerialization, JsonAndCsv) {
    Rng rng = make_rng(8);
    const auto set = tiny_set(10, rng);
    TrainConfig cfg;
    cfg.num_batches = 20;
    cfg.batch_size = 3;
    cfg.runs = 2;
    const auto runs = train_runs(tiny_model(), set, set, cfg);
    ASSERT_EQ(runs.size(), 2u);
    EXPECT_EQ(runs[1].seed, cfg.seed + 1);
    const auto back = train_run_from_json(nlohmann::json::parse(to_json(runs[0]).dump()));
    EXPECT_EQ(to_json(back), to_json(runs[0]));
    const auto cfg_back = train_config_from_json(to_json(cfg));
    EXPECT_EQ(to_json(cfg_back), to_json(cfg));
    const std::string csv = history_csv(runs);
    EXPECT_EQ(csv.rfind("batch,loss_mean,loss_std,accuracy_mean,accuracy_std\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);  // header + batches 0 and 20
    EXPECT_THROW(train_config_from_json(nlohmann::json{{"learning_rate", -1.0}}), std::invalid_argument);
}
