#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "image.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace qforge {

// Single-output classification: [0,1] split into equal bins, one per class.
struct BsocSpec {
    int num_classes = 2;
    double label_noise = 0.02;

    void validate() const {
        if (num_classes < 1) throw std::invalid_argument("BsocSpec: need at least one class");
        if (label_noise < 0.0) throw std::invalid_argument("BsocSpec: negative label noise");
    }
    double center(int c) const { return (2.0 * c + 1.0) / (2.0 * num_classes); }
    double lower_edge(int c) const { return static_cast<double>(c) / num_classes; }
};

inline double label_to_target(int class_index, const BsocSpec& spec, Rng& rng) {
    spec.validate();
    if (class_index < 0 || class_index >= spec.num_classes)
        throw std::out_of_range("label_to_target: class index out of range");
    double t = spec.center(class_index);
    if (spec.label_noise > 0.0) t += std::normal_distribution<double>(0.0, spec.label_noise)(rng);
    return std::clamp(t, 0.0, 1.0);
}

inline double mae_loss(std::span<const double> targets, std::span<const double> predictions) {
    if (targets.empty()) throw std::invalid_argument("mae_loss: empty batch");
    if (targets.size() != predictions.size()) throw std::invalid_argument("mae_loss: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) s += std::abs(targets[i] - predictions[i]);
    return s / static_cast<double>(targets.size());
}

// Boundary values go to the upper bin; 1.0 belongs to the last bin.
inline int predict_class(double output, const BsocSpec& spec) {
    spec.validate();
    if (!(output >= 0.0 && output <= 1.0)) throw std::domain_error("predict_class: output outside [0, 1]");
    const int c = static_cast<int>(std::floor(output * spec.num_classes));
    return std::min(c, spec.num_classes - 1);
}

// Forward differences. With threads > 1 the shifted evaluations run
// concurrently; the result does not depend on the thread count.
inline std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& loss_at,
                                                std::span<const double> params, double epsilon, int threads = 1) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("finite_diff_gradient: epsilon must be positive");
    const double base = loss_at(params);
    std::vector<double> grad(params.size());
    parallel_for(params.size(), threads, [&](std::size_t j) {
        std::vector<double> shifted(params.begin(), params.end());
        shifted[j] += epsilon;
        grad[j] = (loss_at(shifted) - base) / epsilon;
    });
    return grad;
}

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(AdamState& st, std::vector<double>& params, std::span<const double> grads, double lr) {
    if (st.m.size() != params.size() || grads.size() != params.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    ++st.step;
    const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grads[i];
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grads[i] * grads[i];
        params[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + st.eps_hat);
    }
}

// Anything trainable: a forward pass and a parameter count.
struct Classifier {
    std::string name;
    int num_params = 0;
    std::function<double(const Image&, std::span<const double>)> forward;
};

inline Classifier make_classifier(RegularModel m) {
    const int n = m.num_params();
    std::string name = m.name;
    return {std::move(name), n, [model = std::move(m)](const Image& x, std::span<const double> w) {
                return regular_forward(model, x, w);
            }};
}

inline Classifier make_classifier(HybridModel m) {
    const int n = m.num_params();
    std::string name = m.name;
    return {std::move(name), n, [model = std::move(m)](const Image& x, std::span<const double> w) {
                return hybrid_forward(model, x, w);
            }};
}

struct TrainConfig {
    double learning_rate = 0.01;
    int num_batches = 200;
    int batch_size = 25;
    int eval_every = 20;
    double fd_epsilon = 0.1;
    int runs = 5;
    std::uint64_t seed = 0;
    int threads = 1;
    BsocSpec bsoc;

    void validate() const {
        if (!(learning_rate > 0.0) || num_batches < 0 || batch_size < 1 || eval_every < 1 || !(fd_epsilon > 0.0) || runs < 1 ||
            threads < 1)
            throw std::invalid_argument("TrainConfig: invalid value");
        bsoc.validate();
    }
};

struct EvalPoint {
    int batch = 0;
    double loss = 0.0;
    double accuracy = 0.0;  // percent
};

struct TrainRun {
    std::string model;
    std::uint64_t seed = 0;
    std::vector<EvalPoint> history;
    std::vector<double> initial_params;
    std::vector<double> final_params;
    std::size_t train_size = 0;
    std::size_t test_size = 0;

    double final_accuracy() const { return history.empty() ? 0.0 : history.back().accuracy; }
};

struct EvalResult {
    double accuracy = 0.0;
    double loss = 0.0;
};

inline EvalResult evaluate(const Classifier& model, std::span<const double> params, const LabeledSet& test,
                           const BsocSpec& spec, int threads = 1) {
    if (test.size() == 0 || test.labels.size() != test.size()) throw std::invalid_argument("evaluate: bad test set");
    std::vector<double> out(test.size());
    parallel_for(test.size(), threads, [&](std::size_t i) { out[i] = model.forward(test.images[i], params); });
    std::vector<double> centers(test.size());
    int correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        centers[i] = spec.center(test.labels[i]);
        if (predict_class(out[i], spec) == test.labels[i]) ++correct;
    }
    return {100.0 * correct / static_cast<double>(test.size()), mae_loss(centers, out)};
}

namespace detail {
inline constexpr std::uint64_t init_stream = 11;
inline constexpr std::uint64_t batch_stream = 12;
}  // namespace detail

// One seeded run: uniform [0, 2pi) init, sampled batches, noisy targets,
// forward-difference ADAM.
inline TrainRun train(const Classifier& model, const LabeledSet& train_set, const LabeledSet& test_set,
                      const TrainConfig& cfg, std::uint64_t run_seed) {
    cfg.validate();
    if (train_set.size() == 0 || train_set.labels.size() != train_set.size())
        throw std::invalid_argument("train: empty or inconsistent training set");
    TrainRun run;
    run.model = model.name;
    run.seed = run_seed;
    run.train_size = train_set.size();
    run.test_size = test_set.size();

    Rng init_rng = make_rng(run_seed, detail::init_stream);
    std::vector<double> params = uniform_vector(init_rng, static_cast<std::size_t>(model.num_params), 0.0, 2.0 * pi);
    run.initial_params = params;
    AdamState adam(params.size());
    Rng batch_rng = make_rng(run_seed, detail::batch_stream);
    std::uniform_int_distribution<std::size_t> pick(0, train_set.size() - 1);

    auto record = [&](int b) {
        const auto e = evaluate(model, params, test_set, cfg.bsoc, cfg.threads);
        run.history.push_back({b, e.loss, e.accuracy});
    };
    record(0);
    std::vector<std::size_t> idx(static_cast<std::size_t>(cfg.batch_size));
    std::vector<double> targets(idx.size());
    for (int b = 1; b <= cfg.num_batches; ++b) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            idx[i] = pick(batch_rng);
            targets[i] = label_to_target(train_set.labels[idx[i]], cfg.bsoc, batch_rng);
        }
        auto loss_at = [&](std::span<const double> w) {
            std::vector<double> preds(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) preds[i] = model.forward(train_set.images[idx[i]], w);
            return mae_loss(targets, preds);
        };
        const auto grad = finite_diff_gradient(loss_at, params, cfg.fd_epsilon, cfg.threads);
        adam_step(adam, params, grad, cfg.learning_rate);
        if (b % cfg.eval_every == 0) record(b);
    }
    run.final_params = params;
    return run;
}

// cfg.runs independent runs with seeds cfg.seed, cfg.seed + 1, ...
inline std::vector<TrainRun> train_runs(const Classifier& model, const LabeledSet& train_set, const LabeledSet& test_set,
                                        const TrainConfig& cfg) {
    std::vector<TrainRun> out;
    for (int r = 0; r < cfg.runs; ++r) out.push_back(train(model, train_set, test_set, cfg, cfg.seed + static_cast<std::uint64_t>(r)));
    return out;
}

// Mean and population std of each eval point across runs.
struct HistoryStats {
    std::vector<int> batch;
    std::vector<double> loss_mean, loss_std, acc_mean, acc_std;
};

inline HistoryStats aggregate(const std::vector<TrainRun>& runs) {
    HistoryStats h;
    if (runs.empty()) return h;
    const std::size_t points = runs.front().history.size();
    for (const auto& r : runs)
        if (r.history.size() != points) throw std::invalid_argument("aggregate: runs have different histories");
    for (std::size_t p = 0; p < points; ++p) {
        double lm = 0, am = 0;
        for (const auto& r : runs) {
            lm += r.history[p].loss;
            am += r.history[p].accuracy;
        }
        lm /= static_cast<double>(runs.size());
        am /= static_cast<double>(runs.size());
        double lv = 0, av = 0;
        for (const auto& r : runs) {
            lv += (r.history[p].loss - lm) * (r.history[p].loss - lm);
            av += (r.history[p].accuracy - am) * (r.history[p].accuracy - am);
        }
        h.batch.push_back(runs.front().history[p].batch);
        h.loss_mean.push_back(lm);
        h.loss_std.push_back(std::sqrt(lv / static_cast<double>(runs.size())));
        h.acc_mean.push_back(am);
        h.acc_std.push_back(std::sqrt(av / static_cast<double>(runs.size())));
    }
    return h;
}

inline nlohmann::json to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"num_batches", c.num_batches}, {"batch_size", c.batch_size},
            {"eval_every", c.eval_every},       {"fd_epsilon", c.fd_epsilon},   {"runs", c.runs},
            {"seed", c.seed},                   {"num_classes", c.bsoc.num_classes}, {"label_noise", c.bsoc.label_noise}};
}

// Overrides fields present in `j`.
inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c = {}) {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.num_batches = j.value("num_batches", c.num_batches);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.fd_epsilon = j.value("fd_epsilon", c.fd_epsilon);
    c.runs = j.value("runs", c.runs);
    c.seed = j.value("seed", c.seed);
    c.bsoc.num_classes = j.value("num_classes", c.bsoc.num_classes);
    c.bsoc.label_noise = j.value("label_noise", c.bsoc.label_noise);
    c.validate();
    return c;
}

inline nlohmann::json to_json(const TrainRun& r) {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& e : r.history) hist.push_back({{"batch", e.batch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
    return {{"model", r.model},
            {"seed", r.seed},
            {"train_size", r.train_size},
            {"test_size", r.test_size},
            {"history", hist},
            {"initial_params", r.initial_params},
            {"final_params", r.final_params}};
}

inline TrainRun train_run_from_json(const nlohmann::json& j) {
    TrainRun r;
    r.model = j.value("model", std::string{});
    r.seed = j.at("seed").get<std::uint64_t>();
    r.train_size = j.value("train_size", std::size_t{0});
    r.test_size = j.value("test_size", std::size_t{0});
    for (const auto& e : j.at("history"))
        r.history.push_back({e.at("batch").get<int>(), e.at("loss").get<double>(), e.at("accuracy").get<double>()});
    r.initial_params = j.value("initial_params", std::vector<double>{});
    r.final_params = j.at("final_params").get<std::vector<double>>();
    return r;
}

inline std::string history_csv(const std::vector<TrainRun>& runs) {
    std::string s = "batch,loss_mean,loss_std,accuracy_mean,accuracy_std\n";
    const auto h = aggregate(runs);
    for (std::size_t i = 0; i < h.batch.size(); ++i) {
        char line[160];
        std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.4f,%.4f\n", h.batch[i], h.loss_mean[i], h.loss_std[i], h.acc_mean[i],
                      h.acc_std[i]);
        s += line;
    }
    return s;
}

}  // namespace qforge
