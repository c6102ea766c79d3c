#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"
#include "library.hpp"
#include "random.hpp"

namespace qforge {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct SamplingBudget {
    int num_inputs = 10;
    int num_weight_samples = 2000;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_inputs < 1) throw std::invalid_argument("SamplingBudget: need at least one input");
        if (num_weight_samples < 2) throw std::invalid_argument("SamplingBudget: need at least two weight samples");
    }
};

struct FidelityHistogram {
    int num_bins = 75;
    double upper = 1.0;  // support is [0, upper]
    std::vector<double> edges;
    std::vector<double> probabilities;
    double epsilon_bin = 0.0;
    bool truncated = false;

    // Bin of a fidelity value, or -1 when it lies beyond the retained support.
    int bin_of(double f) const {
        if (f > upper * (1.0 + 1e-12)) return -1;
        const int b = static_cast<int>(std::floor(std::max(f, 0.0) / upper * num_bins));
        return std::min(b, num_bins - 1);
    }
};

// D_KL(p || q). Empty bins of p contribute nothing; mass of p where q is zero
// makes the divergence infinite.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return infinity;
        d += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(d, 0.0);
}

namespace detail {

// log of (1 - x)^(N - 1)
inline double log_tail(double x, double n_minus_1) {
    if (x >= 1.0) return -infinity;
    return n_minus_1 * std::log1p(-x);
}

// Log bin masses of the Haar fidelity law on [0, upper], unnormalized, plus log of the total.
inline std::vector<double> haar_log_masses(double n_minus_1, int bins, double upper, double& log_total) {
    std::vector<double> out(static_cast<std::size_t>(bins));
    for (int j = 0; j < bins; ++j) {
        const double a = upper * j / bins, b = upper * (j + 1) / bins;
        const double la = log_tail(a, n_minus_1), lb = log_tail(b, n_minus_1);
        out[static_cast<std::size_t>(j)] = la + std::log(-std::expm1(lb - la));
    }
    const double lu = log_tail(upper, n_minus_1);
    log_total = std::log(-std::expm1(lu));
    return out;
}

inline double min_log_share(double n_minus_1, int bins, double upper) {
    double log_total = 0.0;
    const auto lm = haar_log_masses(n_minus_1, bins, upper, log_total);
    return *std::min_element(lm.begin(), lm.end()) - log_total;
}

}  // namespace detail

// Binned Haar fidelity law P(F) = (N-1)(1-F)^(N-2). When a bin would fall below
// epsilon_bin, the support is cut back from F = 1 until every bin of the
// renormalized law keeps at least epsilon_bin.
inline FidelityHistogram haar_fidelity_histogram(int num_qubits, int num_bins = 75, double epsilon_bin = 1e-30) {
    if (num_bins < 2) throw std::invalid_argument("haar_fidelity_histogram: need at least two bins");
    if (num_qubits < 1) throw std::invalid_argument("haar_fidelity_histogram: need at least one qubit");
    const double n_minus_1 = std::ldexp(1.0, num_qubits) - 1.0;
    FidelityHistogram h;
    h.num_bins = num_bins;
    h.epsilon_bin = epsilon_bin;
    if (epsilon_bin > 0.0) {
        const double log_eps = std::log(epsilon_bin);
        if (detail::min_log_share(n_minus_1, num_bins, 1.0) < log_eps) {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (detail::min_log_share(n_minus_1, num_bins, mid) >= log_eps) lo = mid;
                else hi = mid;
            }
            h.upper = lo;
            h.truncated = true;
        }
    }
    double log_total = 0.0;
    const auto lm = detail::haar_log_masses(n_minus_1, num_bins, h.upper, log_total);
    h.probabilities.resize(static_cast<std::size_t>(num_bins));
    for (int j = 0; j < num_bins; ++j)
        h.probabilities[static_cast<std::size_t>(j)] = std::exp(lm[static_cast<std::size_t>(j)] - log_total);
    const double sum = std::accumulate(h.probabilities.begin(), h.probabilities.end(), 0.0);
    for (auto& p : h.probabilities) p /= sum;
    for (int j = 0; j <= num_bins; ++j) h.edges.push_back(h.upper * j / num_bins);
    return h;
}

// Largest divergence a histogram can reach against this target (all mass in the least likely bin).
inline double worst_case_expressibility(const FidelityHistogram& h) {
    const double pmin = *std::min_element(h.probabilities.begin(), h.probabilities.end());
    return pmin > 0.0 ? -std::log(pmin) : infinity;
}

struct Summary {
    double mean = 0.0;
    double std = 0.0;
    std::vector<double> per_input;
};

inline Summary summarize(std::vector<double> values) {
    Summary s;
    s.per_input = std::move(values);
    const double n = static_cast<double>(s.per_input.size());
    bool any_inf = false;
    for (double v : s.per_input) any_inf |= std::isinf(v);
    if (any_inf) {
        s.mean = s.std = infinity;
        return s;
    }
    s.mean = std::accumulate(s.per_input.begin(), s.per_input.end(), 0.0) / n;
    double var = 0.0;
    for (double v : s.per_input) var += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(var / n);
    return s;
}

enum class StateInit { HaarStates, RandomQeInputs, ZeroState, RandomBasisStates };

inline std::string to_string(StateInit s) {
    switch (s) {
        case StateInit::HaarStates: return "haar_states";
        case StateInit::RandomQeInputs: return "random_qe_inputs";
        case StateInit::ZeroState: return "zero_state";
        case StateInit::RandomBasisStates: return "random_basis_states";
    }
    return "?";
}

inline StateInit parse_state_init(const std::string& s) {
    for (auto k : {StateInit::HaarStates, StateInit::RandomQeInputs, StateInit::ZeroState, StateInit::RandomBasisStates})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown state initializer: " + s);
}

// Ry(x_q)|0> on every qubit.
inline StateVector qe_product_state(std::span<const double> x) {
    std::vector<std::array<cplx, 2>> f(x.size());
    for (std::size_t q = 0; q < x.size(); ++q) f[q] = {std::cos(x[q] / 2), std::sin(x[q] / 2)};
    return StateVector::product(f);
}

inline StateVector initial_state(StateInit init, int num_qubits, Rng& rng) {
    switch (init) {
        case StateInit::HaarStates: return haar_state(num_qubits, rng);
        case StateInit::RandomQeInputs: {
            const auto x = uniform_vector(rng, static_cast<std::size_t>(num_qubits), 0.0, pi);
            return qe_product_state(x);
        }
        case StateInit::ZeroState: return StateVector(num_qubits);
        case StateInit::RandomBasisStates: {
            std::uniform_int_distribution<std::size_t> d(0, (std::size_t{1} << num_qubits) - 1);
            return StateVector::basis(num_qubits, d(rng));
        }
    }
    throw std::invalid_argument("initial_state: bad initializer");
}

namespace stream {
inline constexpr std::uint64_t expressibility = 1;
inline constexpr std::uint64_t entanglement = 2;
}  // namespace stream

inline Summary expressibility_regular(const ParameterizedCircuit& c, const SamplingBudget& budget,
                                      const FidelityHistogram& target, StateInit init = StateInit::HaarStates) {
    budget.validate();
    const int n = c.num_qubits();
    const auto p = static_cast<std::size_t>(c.num_params());
    const int pairs = budget.num_weight_samples / 2;
    std::vector<double> values;
    for (int ci = 0; ci < budget.num_inputs; ++ci) {
        Rng rng = make_rng(budget.seed, stream::expressibility, static_cast<std::uint64_t>(ci));
        const StateVector psi0 = initial_state(init, n, rng);
        std::vector<double> counts(static_cast<std::size_t>(target.num_bins), 0.0);
        bool outside = false;
        for (int i = 0; i < pairs; ++i) {
            const auto ta = uniform_vector(rng, p, 0.0, 2 * pi);
            const auto tb = uniform_vector(rng, p, 0.0, 2 * pi);
            const double f = fidelity(run_circuit(c, ta, psi0), run_circuit(c, tb, psi0));
            const int b = target.bin_of(f);
            if (b < 0) outside = true;
            else counts[static_cast<std::size_t>(b)] += 1.0;
        }
        if (outside) {
            values.push_back(infinity);
            continue;
        }
        for (auto& v : counts) v /= pairs;
        values.push_back(kl_divergence(counts, target.probabilities));
    }
    return summarize(std::move(values));
}

// Class index of a probability under equal-width bins; a value on a boundary
// belongs to the upper bin.
inline int probability_bin(double prob, int num_classes) {
    return std::clamp(static_cast<int>(std::floor(prob * num_classes)), 0, num_classes - 1);
}

inline Summary expressibility_hybrid(const ParameterizedCircuit& c, int num_classes, const SamplingBudget& budget) {
    budget.validate();
    if (num_classes < 2) throw std::invalid_argument("expressibility_hybrid: need at least two classes");
    const int n = c.num_qubits();
    const auto p = static_cast<std::size_t>(c.num_params());
    const std::vector<double> uniform_target(static_cast<std::size_t>(num_classes), 1.0 / num_classes);
    std::vector<double> values;
    for (int ci = 0; ci < budget.num_inputs; ++ci) {
        Rng rng = make_rng(budget.seed, stream::expressibility, static_cast<std::uint64_t>(ci));
        const StateVector psi0 = initial_state(StateInit::RandomQeInputs, n, rng);
        std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
        for (int s = 0; s < budget.num_weight_samples; ++s) {
            const auto theta = uniform_vector(rng, p, 0.0, 2 * pi);
            const double prob = last_qubit_prob1(run_circuit(c, theta, psi0), n - 1);
            counts[static_cast<std::size_t>(probability_bin(prob, num_classes))] += 1.0;
        }
        for (auto& v : counts) v /= budget.num_weight_samples;
        values.push_back(kl_divergence(counts, uniform_target));
    }
    return summarize(std::move(values));
}

inline double meyer_wallach_q(const StateVector& s) {
    const int n = s.num_qubits();
    if (n < 2) throw std::invalid_argument("meyer_wallach_q: needs at least two qubits");
    double purity = 0.0;
    for (int q = 0; q < n; ++q) purity += single_qubit_purity(s, q);
    return std::clamp(2.0 * (1.0 - purity / n), 0.0, 1.0);
}

inline Summary entanglement_metric(const ParameterizedCircuit& c, const SamplingBudget& budget, StateInit init) {
    budget.validate();
    const int n = c.num_qubits();
    const auto p = static_cast<std::size_t>(c.num_params());
    std::vector<double> values;
    for (int ci = 0; ci < budget.num_inputs; ++ci) {
        Rng rng = make_rng(budget.seed, stream::entanglement, static_cast<std::uint64_t>(ci));
        const StateVector psi0 = initial_state(init, n, rng);
        double sum = 0.0;
        for (int s = 0; s < budget.num_weight_samples; ++s) {
            const auto theta = uniform_vector(rng, p, 0.0, 2 * pi);
            sum += meyer_wallach_q(run_circuit(c, theta, psi0));
        }
        values.push_back(sum / budget.num_weight_samples);
    }
    return summarize(std::move(values));
}

inline double haar_mean_entanglement(int num_qubits) {
    if (num_qubits < 1) throw std::invalid_argument("haar_mean_entanglement: need at least one qubit");
    const double d = std::ldexp(1.0, num_qubits);
    return (d - 2.0) / (d + 1.0);
}

struct ThresholdSet {
    double expr_thr = 0.0;
    double entgl_thr = 0.0;
    double expr_max = 1.0;
    int params_max = 0;
    int depth_max = 0;
    int gates_max = 0;
};

inline ThresholdSet complexity_caps(int num_qubits) {
    ThresholdSet t;
    t.params_max = num_qubits;
    t.depth_max = 3 * num_qubits;
    t.gates_max = 5 * num_qubits;
    return t;
}

struct ObjectiveTerms {
    double expr = 0.0;
    double entgl = 0.0;
    double cmplx = 0.0;
    double total = 0.0;
};

inline ObjectiveTerms objective_terms(double expr, double entgl, const Complexity& cx, const ThresholdSet& t) {
    ObjectiveTerms o;
    o.expr = std::isinf(expr) ? infinity : std::max((expr - t.expr_thr) / (t.expr_max - t.expr_thr), 0.0);
    o.entgl = std::max((t.entgl_thr - entgl) / t.entgl_thr, 0.0);
    o.cmplx = static_cast<double>(cx.gates + cx.params + cx.depth) /
              static_cast<double>(t.gates_max + t.params_max + t.depth_max);
    const double shortfall = o.expr + o.entgl;
    o.total = shortfall != 0.0 ? 1.0 + shortfall : o.cmplx;
    return o;
}

inline double objective_lpqc(double expr, double entgl, const Complexity& cx, const ThresholdSet& t) {
    return objective_terms(expr, entgl, cx, t).total;
}

enum class NoiseModel { Additive, Relative };

// Mean divergence between a noisy copy of `target` and `target` itself.
// Additive noise perturbs each probability by N(0, sigma); relative noise
// scales it by (1 + N(0, sigma)).
inline double derive_expr_threshold(std::span<const double> target, double sigma_std, int num_draws, Rng& rng,
                                    NoiseModel model = NoiseModel::Additive) {
    if (!(sigma_std > 0.0)) throw std::invalid_argument("derive_expr_threshold: sigma must be positive");
    std::normal_distribution<double> g(0.0, sigma_std);
    std::vector<double> noisy(target.size());
    double acc = 0.0;
    for (int d = 0; d < num_draws; ++d) {
        double sum = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i) {
            const double e = g(rng);
            const double v = model == NoiseModel::Additive ? target[i] + e : target[i] * (1.0 + e);
            noisy[i] = std::max(v, 0.0);
            sum += noisy[i];
        }
        if (sum <= 0.0) {
            --d;
            continue;
        }
        for (auto& v : noisy) v /= sum;
        acc += kl_divergence(noisy, target);
    }
    return acc / num_draws;
}

struct MetricOptions {
    int num_classes = 4;                       // hybrid class bins
    int num_bins = 75;                         // regular fidelity bins
    double epsilon_bin = 1e-30;
    StateInit regular_entanglement_init = StateInit::ZeroState;
    double hybrid_noise_sigma = 0.05;
    double regular_noise_sigma = 0.2;
    int threshold_draws = 20000;
    std::uint64_t threshold_seed = 7;
};

// Thresholds and caps used to score circuits of one architecture and width.
inline ThresholdSet default_thresholds(Architecture arch, int num_qubits, const MetricOptions& opt = {}) {
    ThresholdSet t = complexity_caps(num_qubits);
    t.entgl_thr = haar_mean_entanglement(num_qubits);
    Rng rng = make_rng(opt.threshold_seed, 99, static_cast<std::uint64_t>(num_qubits));
    if (arch == Architecture::Hybrid) {
        const std::vector<double> uniform_target(static_cast<std::size_t>(opt.num_classes), 1.0 / opt.num_classes);
        t.expr_thr = derive_expr_threshold(uniform_target, opt.hybrid_noise_sigma, opt.threshold_draws, rng,
                                           NoiseModel::Additive);
        t.expr_max = std::log(static_cast<double>(opt.num_classes));
    } else {
        const auto h = haar_fidelity_histogram(num_qubits, opt.num_bins, opt.epsilon_bin);
        t.expr_thr = derive_expr_threshold(h.probabilities, opt.regular_noise_sigma, opt.threshold_draws, rng,
                                           NoiseModel::Relative);
        t.expr_max = worst_case_expressibility(h);
    }
    return t;
}

struct MetricReport {
    std::string circuit_id;
    int num_qubits = 0;
    Complexity complexity;
    double expr_mean = 0.0, expr_std = 0.0;
    double entgl_mean = 0.0, entgl_std = 0.0;
    double l_pqc = 0.0;
    ThresholdSet thresholds;
};

inline MetricReport evaluate_circuit(const ParameterizedCircuit& c, Architecture arch, const SamplingBudget& budget,
                                     const ThresholdSet& thresholds, const MetricOptions& opt = {}) {
    MetricReport r;
    r.num_qubits = c.num_qubits();
    r.complexity = circuit_complexity(c);
    r.thresholds = thresholds;
    Summary expr, ent;
    if (arch == Architecture::Hybrid) {
        expr = expressibility_hybrid(c, opt.num_classes, budget);
        ent = entanglement_metric(c, budget, StateInit::RandomQeInputs);
    } else {
        expr = expressibility_regular(c, budget, haar_fidelity_histogram(c.num_qubits(), opt.num_bins, opt.epsilon_bin));
        ent = entanglement_metric(c, budget, opt.regular_entanglement_init);
    }
    r.expr_mean = expr.mean;
    r.expr_std = expr.std;
    r.entgl_mean = ent.mean;
    r.entgl_std = ent.std;
    r.l_pqc = objective_lpqc(r.expr_mean, r.entgl_mean, r.complexity, thresholds);
    return r;
}

namespace detail {
inline nlohmann::json finite_or_string(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}
}  // namespace detail

inline nlohmann::json to_json(const MetricReport& r) {
    return {{"circuit_id", r.circuit_id},
            {"qubits", r.num_qubits},
            {"params", r.complexity.params},
            {"depth", r.complexity.depth},
            {"gates", r.complexity.gates},
            {"expr_mean", detail::finite_or_string(r.expr_mean)},
            {"expr_std", detail::finite_or_string(r.expr_std)},
            {"entgl_mean", r.entgl_mean},
            {"entgl_std", r.entgl_std},
            {"l_pqc", detail::finite_or_string(r.l_pqc)},
            {"thresholds",
             {{"expr_thr", r.thresholds.expr_thr},
              {"entgl_thr", r.thresholds.entgl_thr},
              {"expr_max", detail::finite_or_string(r.thresholds.expr_max)},
              {"params_max", r.thresholds.params_max},
              {"depth_max", r.thresholds.depth_max},
              {"gates_max", r.thresholds.gates_max}}}};
}

inline std::string csv_header() {
    return "circuit_id,qubits,params,depth,gates,expr_mean,expr_std,entgl_mean,entgl_std,l_pqc";
}

inline std::string to_csv_row(const MetricReport& r) {
    auto num = [](double v) {
        if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    return r.circuit_id + "," + std::to_string(r.num_qubits) + "," + std::to_string(r.complexity.params) + "," +
           std::to_string(r.complexity.depth) + "," + std::to_string(r.complexity.gates) + "," + num(r.expr_mean) +
           "," + num(r.expr_std) + "," + num(r.entgl_mean) + "," + num(r.entgl_std) + "," + num(r.l_pqc);
}

}  // namespace qforge
