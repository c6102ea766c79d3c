#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"
#include "library.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace qforge {

// One gate of a genome. Each parameter is either fresh (-1) or reuses an
// earlier fresh parameter by its index.
struct GenomeSlot {
    GateKind kind = GateKind::H;
    std::vector<int> qubits;
    std::vector<int> params;

    bool operator==(const GenomeSlot&) const = default;
};

struct Genome {
    int num_qubits = 1;
    std::vector<GenomeSlot> slots;

    bool operator==(const Genome&) const = default;
};

class CapViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GenomeCaps {
    int max_gates, max_fresh, max_depth;
};

inline GenomeCaps genome_caps(int num_qubits) { return {5 * num_qubits, num_qubits, 3 * num_qubits}; }

inline ParameterizedCircuit decode(const Genome& g) {
    const auto caps = genome_caps(g.num_qubits);
    if (static_cast<int>(g.slots.size()) > caps.max_gates) throw CapViolation("genome exceeds the gate cap");
    ParameterizedCircuit c(g.num_qubits);
    int fresh = 0;
    for (const auto& s : g.slots) {
        if (static_cast<int>(s.params.size()) != gate_param_count(s.kind))
            throw std::invalid_argument("genome slot has the wrong number of parameters");
        std::vector<int> slots;
        for (int p : s.params) {
            if (p < 0) slots.push_back(fresh++);
            else if (p < fresh) slots.push_back(p);
            else throw std::invalid_argument("genome reuses a parameter that does not exist yet");
        }
        c.add(s.kind, s.qubits, slots);
    }
    if (fresh > caps.max_fresh) throw CapViolation("genome exceeds the parameter cap");
    if (circuit_complexity(c).depth > caps.max_depth) throw CapViolation("genome exceeds the depth cap");
    return c;
}

// Inverse of decode for circuits whose slots are numbered in first-use order.
inline Genome genome_from_circuit(const ParameterizedCircuit& c) {
    Genome g;
    g.num_qubits = c.num_qubits();
    int fresh = 0;
    for (const auto& a : c.gates()) {
        GenomeSlot s{a.kind, a.qubits, {}};
        for (int p : a.param_slots) {
            if (p == fresh) {
                s.params.push_back(-1);
                ++fresh;
            } else if (p < fresh) {
                s.params.push_back(p);
            } else {
                throw std::invalid_argument("genome_from_circuit: parameter slots are not in first-use order");
            }
        }
        g.slots.push_back(std::move(s));
    }
    return g;
}

// Canonical text of the decoded circuit and its 64-bit FNV-1a hash.
inline std::string canonical_form(const ParameterizedCircuit& c) { return to_json(c).dump(); }

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t genome_hash(const Genome& g) { return fnv1a(canonical_form(decode(g))); }

// ---------------------------------------------------------------- proposals

namespace detail {

// Depth bookkeeping while growing a genome.
struct DepthTracker {
    std::vector<int> level;
    int depth = 0;
    explicit DepthTracker(int n) : level(static_cast<std::size_t>(n), 0) {}
    int after(const std::vector<int>& qs) const {
        int l = 0;
        for (int q : qs) l = std::max(l, level[static_cast<std::size_t>(q)]);
        return l + 1;
    }
    void add(const std::vector<int>& qs) {
        const int l = after(qs);
        for (int q : qs) level[static_cast<std::size_t>(q)] = l;
        depth = std::max(depth, l);
    }
};

inline constexpr double reuse_probability = 0.3;

}  // namespace detail

// Categorical choices that make up one proposal step. Weights may be biased
// by the surrogate; the uniform sampler passes all-ones.
struct SlotSampler {
    virtual ~SlotSampler() = default;
    virtual int length(Rng& rng, int max_len) = 0;
    virtual int kind(Rng& rng, int position) = 0;                              // index into all_gate_kinds
    virtual int qubit(Rng& rng, int position, int operand, const std::vector<int>& taken, int n) = 0;
};

struct UniformSampler : SlotSampler {
    int length(Rng& rng, int max_len) override { return std::uniform_int_distribution<int>(1, max_len)(rng); }
    int kind(Rng& rng, int) override {
        return std::uniform_int_distribution<int>(0, static_cast<int>(all_gate_kinds.size()) - 1)(rng);
    }
    int qubit(Rng& rng, int, int, const std::vector<int>& taken, int n) override {
        std::vector<int> free;
        for (int q = 0; q < n; ++q)
            if (std::find(taken.begin(), taken.end(), q) == taken.end()) free.push_back(q);
        return free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
};

// Grows a genome slot by slot within the caps. A slot that would break the
// depth cap is redrawn a few times and otherwise ends the genome.
inline Genome sample_genome(int num_qubits, SlotSampler& s, Rng& rng) {
    const auto caps = genome_caps(num_qubits);
    Genome g;
    g.num_qubits = num_qubits;
    const int len = s.length(rng, caps.max_gates);
    detail::DepthTracker depth(num_qubits);
    int fresh = 0;
    std::bernoulli_distribution reuse(detail::reuse_probability);
    for (int pos = 0; pos < len; ++pos) {
        std::optional<GenomeSlot> slot;
        for (int attempt = 0; attempt < 8 && !slot; ++attempt) {
            const GateKind k = all_gate_kinds[static_cast<std::size_t>(s.kind(rng, pos))];
            const int arity = gate_arity(k);
            if (arity > num_qubits) continue;
            GenomeSlot cand{k, {}, {}};
            for (int o = 0; o < arity; ++o) cand.qubits.push_back(s.qubit(rng, pos, o, cand.qubits, num_qubits));
            if (depth.after(cand.qubits) > caps.max_depth) continue;
            slot = std::move(cand);
        }
        if (!slot) break;
        int fresh_here = 0;
        for (int p = 0; p < gate_param_count(slot->kind); ++p) {
            const int available = fresh + fresh_here;
            const bool can_fresh = available < caps.max_fresh;
            if (available > 0 && (!can_fresh || reuse(rng))) {
                slot->params.push_back(std::uniform_int_distribution<int>(0, available - 1)(rng));
            } else {
                slot->params.push_back(-1);
                ++fresh_here;
            }
        }
        if (fresh + fresh_here > caps.max_fresh) break;
        fresh += fresh_here;
        depth.add(slot->qubits);
        g.slots.push_back(std::move(*slot));
    }
    return g;
}

// Tree-structured density-ratio surrogate over the genome grammar: observed
// genomes are split at the gamma quantile of the objective into good and
// rest, each side gives smoothed categorical frequencies per position, and
// candidates drawn from the good side are ranked by l(x)/g(x).
class TpeModel {
public:
    explicit TpeModel(int num_qubits, double gamma = 0.2, int num_candidates = 24, int startup_trials = 20)
        : n_(num_qubits), gamma_(gamma), candidates_(num_candidates), startup_(startup_trials) {
        if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("TpeModel: gamma must lie in (0, 1)");
    }

    void observe(const Genome& g, double loss) { obs_.push_back({g, loss}); }
    std::size_t num_observations() const { return obs_.size(); }

    Genome propose(Rng& rng) const {
        UniformSampler uniform;
        if (static_cast<int>(obs_.size()) < startup_) return sample_genome(n_, uniform, rng);
        const auto [good, rest] = split();
        Tables lg = tables(good), gr = tables(rest);
        WeightedSampler from_good(lg);
        std::optional<Genome> best;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < candidates_; ++i) {
            Genome cand = sample_genome(n_, from_good, rng);
            const double score = log_density(lg, cand) - log_density(gr, cand);
            if (score > best_score) {
                best_score = score;
                best = std::move(cand);
            }
        }
        return *best;
    }

private:
    struct Obs {
        Genome genome;
        double loss;
    };

    // Per-position categorical counts with a unit uniform prior.
    struct Tables {
        int n = 1;
        std::vector<double> length;                    // index = length
        std::vector<std::vector<double>> kind;         // [position][kind]
        std::vector<std::vector<std::vector<double>>> qubit;  // [position][operand][qubit]

        const std::vector<double>& kinds_at(int pos, std::vector<double>& scratch) const {
            if (pos < static_cast<int>(kind.size())) return kind[static_cast<std::size_t>(pos)];
            scratch.assign(all_gate_kinds.size(), 1.0);
            return scratch;
        }
        std::vector<double> qubits_at(int pos, int operand) const {
            if (pos < static_cast<int>(qubit.size())) return qubit[static_cast<std::size_t>(pos)][static_cast<std::size_t>(operand)];
            return std::vector<double>(static_cast<std::size_t>(n), 1.0);
        }
    };

    struct WeightedSampler : SlotSampler {
        const Tables& t;
        explicit WeightedSampler(const Tables& tables) : t(tables) {}
        static int draw(Rng& rng, const std::vector<double>& w) {
            return std::discrete_distribution<int>(w.begin(), w.end())(rng);
        }
        int length(Rng& rng, int max_len) override {
            std::vector<double> w(t.length.begin() + 1, t.length.begin() + 1 + max_len);
            return 1 + draw(rng, w);
        }
        int kind(Rng& rng, int pos) override {
            std::vector<double> scratch;
            return draw(rng, t.kinds_at(pos, scratch));
        }
        int qubit(Rng& rng, int pos, int operand, const std::vector<int>& taken, int) override {
            auto w = t.qubits_at(pos, std::min(operand, 1));
            for (int q : taken) w[static_cast<std::size_t>(q)] = 0.0;
            return draw(rng, w);
        }
    };

    std::pair<std::vector<const Obs*>, std::vector<const Obs*>> split() const {
        std::vector<const Obs*> order;
        for (const auto& o : obs_) order.push_back(&o);
        std::stable_sort(order.begin(), order.end(), [](const Obs* a, const Obs* b) { return a->loss < b->loss; });
        const auto n_good = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(gamma_ * static_cast<double>(order.size()))));
        return {std::vector<const Obs*>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_good)),
                std::vector<const Obs*>(order.begin() + static_cast<std::ptrdiff_t>(n_good), order.end())};
    }

    Tables tables(const std::vector<const Obs*>& group) const {
        const auto caps = genome_caps(n_);
        Tables t;
        t.n = n_;
        t.length.assign(static_cast<std::size_t>(caps.max_gates + 1), 1.0);
        t.length[0] = 0.0;
        t.kind.assign(static_cast<std::size_t>(caps.max_gates), std::vector<double>(all_gate_kinds.size(), 1.0));
        t.qubit.assign(static_cast<std::size_t>(caps.max_gates),
                       std::vector<std::vector<double>>(2, std::vector<double>(static_cast<std::size_t>(n_), 1.0)));
        for (const Obs* o : group) {
            const auto& slots = o->genome.slots;
            t.length[std::min(slots.size(), t.length.size() - 1)] += 1.0;
            for (std::size_t p = 0; p < slots.size(); ++p) {
                const auto k = static_cast<std::size_t>(std::find(all_gate_kinds.begin(), all_gate_kinds.end(), slots[p].kind) -
                                                        all_gate_kinds.begin());
                t.kind[p][k] += 1.0;
                for (std::size_t o2 = 0; o2 < slots[p].qubits.size(); ++o2)
                    t.qubit[p][std::min<std::size_t>(o2, 1)][static_cast<std::size_t>(slots[p].qubits[o2])] += 1.0;
            }
        }
        return t;
    }

    static double log_share(const std::vector<double>& w, std::size_t i) {
        double s = 0.0;
        for (double v : w) s += v;
        return std::log(w[i] / s);
    }

    double log_density(const Tables& t, const Genome& g) const {
        double l = log_share(t.length, std::min(g.slots.size(), t.length.size() - 1));
        for (std::size_t p = 0; p < g.slots.size(); ++p) {
            const auto k = static_cast<std::size_t>(std::find(all_gate_kinds.begin(), all_gate_kinds.end(), g.slots[p].kind) -
                                                    all_gate_kinds.begin());
            l += log_share(t.kind[p], k);
            for (std::size_t o = 0; o < g.slots[p].qubits.size(); ++o)
                l += log_share(t.qubit[p][std::min<std::size_t>(o, 1)], static_cast<std::size_t>(g.slots[p].qubits[o]));
        }
        return l;
    }

    int n_;
    double gamma_;
    int candidates_;
    int startup_;
    std::vector<Obs> obs_;
};

// ---------------------------------------------------------------- search loop

struct SearchConfig {
    int num_qubits = 2;
    Architecture architecture = Architecture::Regular;
    int num_trials = 2000;
    int max_duplicates = 10;
    SamplingBudget budget;
    std::optional<ThresholdSet> thresholds;  // defaults for the architecture when unset
    MetricOptions metric_options;
    std::uint64_t seed = 0;
    bool random_mode = false;
    double gamma = 0.2;
    int proposal_batch = 1;  // proposals drawn per surrogate update; fixed, independent of threads
    int threads = 1;

    void validate() const {
        if (num_trials < 1) throw std::invalid_argument("SearchConfig: num_trials must be at least 1");
        if (max_duplicates < 1 || proposal_batch < 1 || threads < 1)
            throw std::invalid_argument("SearchConfig: invalid value");
        if (num_qubits < 2) throw std::invalid_argument("SearchConfig: entanglement needs at least two qubits");
        budget.validate();
    }
};

struct TrialRecord {
    int trial = 0;
    std::uint64_t hash = 0;
    bool skipped = false;  // duplicate beyond the cap, not evaluated
    double l_pqc = infinity;
    double expr = 0.0;
    double entgl = 0.0;
    Complexity complexity;
    double wall_seconds = 0.0;
    double best_so_far = infinity;
    Genome genome;
};

struct SearchResult {
    std::vector<TrialRecord> log;
    std::vector<TrialRecord> ranked;  // unique circuits, best first
    ThresholdSet thresholds;
};

// Ordering for ties in the objective: fewer params, fewer gates, lower depth, first seen.
inline bool better_trial(const TrialRecord& a, const TrialRecord& b) {
    if (a.l_pqc != b.l_pqc) return a.l_pqc < b.l_pqc;
    if (a.complexity.params != b.complexity.params) return a.complexity.params < b.complexity.params;
    if (a.complexity.gates != b.complexity.gates) return a.complexity.gates < b.complexity.gates;
    if (a.complexity.depth != b.complexity.depth) return a.complexity.depth < b.complexity.depth;
    return a.trial < b.trial;
}

namespace detail {
inline constexpr std::uint64_t proposal_stream = 31;
}

inline SearchResult run_search(const SearchConfig& cfg) {
    cfg.validate();
    SearchResult out;
    out.thresholds = cfg.thresholds ? *cfg.thresholds : default_thresholds(cfg.architecture, cfg.num_qubits, cfg.metric_options);
    TpeModel model(cfg.num_qubits, cfg.gamma);
    std::unordered_map<std::uint64_t, int> seen;
    std::unordered_map<std::uint64_t, TrialRecord> cache;
    double best = infinity;
    int trial = 0;
    while (trial < cfg.num_trials) {
        const int batch = std::min(cfg.proposal_batch, cfg.num_trials - trial);
        std::vector<TrialRecord> recs(static_cast<std::size_t>(batch));
        std::vector<std::size_t> to_eval;
        std::unordered_map<std::uint64_t, std::size_t> first_in_batch;
        for (int b = 0; b < batch; ++b) {
            Rng rng = make_rng(cfg.seed, detail::proposal_stream, static_cast<std::uint64_t>(trial + b));
            auto& r = recs[static_cast<std::size_t>(b)];
            r.trial = trial + b;
            if (cfg.random_mode) {
                UniformSampler u;
                r.genome = sample_genome(cfg.num_qubits, u, rng);
            } else {
                r.genome = model.propose(rng);
            }
            r.hash = genome_hash(r.genome);
            if (++seen[r.hash] > cfg.max_duplicates) {
                r.skipped = true;
            } else if (!cache.count(r.hash) && !first_in_batch.count(r.hash)) {
                first_in_batch[r.hash] = static_cast<std::size_t>(b);
                to_eval.push_back(static_cast<std::size_t>(b));
            }
        }
        parallel_for(to_eval.size(), cfg.threads, [&](std::size_t i) {
            auto& r = recs[to_eval[i]];
            const auto t0 = std::chrono::steady_clock::now();
            const auto c = decode(r.genome);
            const auto rep = evaluate_circuit(c, cfg.architecture, cfg.budget, out.thresholds, cfg.metric_options);
            r.l_pqc = rep.l_pqc;
            r.expr = rep.expr_mean;
            r.entgl = rep.entgl_mean;
            r.complexity = rep.complexity;
            r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        });
        // commit in trial order
        for (auto& r : recs) {
            if (!r.skipped) {
                if (auto it = cache.find(r.hash); it != cache.end()) {
                    r.l_pqc = it->second.l_pqc;
                    r.expr = it->second.expr;
                    r.entgl = it->second.entgl;
                    r.complexity = it->second.complexity;
                } else if (first_in_batch.count(r.hash) && first_in_batch[r.hash] != static_cast<std::size_t>(r.trial - trial)) {
                    const auto& src = recs[first_in_batch[r.hash]];
                    r.l_pqc = src.l_pqc;
                    r.expr = src.expr;
                    r.entgl = src.entgl;
                    r.complexity = src.complexity;
                } else {
                    cache[r.hash] = r;
                }
                model.observe(r.genome, r.l_pqc);
                best = std::min(best, r.l_pqc);
            }
            r.best_so_far = best;
            out.log.push_back(r);
        }
        trial += batch;
    }
    for (auto& [h, r] : cache) out.ranked.push_back(r);
    std::sort(out.ranked.begin(), out.ranked.end(), better_trial);
    return out;
}

inline nlohmann::json to_json(const Genome& g) {
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : g.slots)
        slots.push_back({{"gate", std::string(gate_name(s.kind))}, {"qubits", s.qubits}, {"params", s.params}});
    return {{"num_qubits", g.num_qubits}, {"slots", slots}};
}

inline nlohmann::json to_json(const TrialRecord& r, bool with_timing = true) {
    nlohmann::json j = {{"trial", r.trial},
                        {"hash", r.hash},
                        {"skipped", r.skipped},
                        {"l_pqc", detail::finite_or_string(r.l_pqc)},
                        {"expr", detail::finite_or_string(r.expr)},
                        {"entgl", r.entgl},
                        {"params", r.complexity.params},
                        {"depth", r.complexity.depth},
                        {"gates", r.complexity.gates},
                        {"best_so_far", detail::finite_or_string(r.best_so_far)}};
    if (with_timing) j["wall_seconds"] = r.wall_seconds;
    return j;
}

// One JSON object per line.
inline void write_trial_log(std::ostream& os, const std::vector<TrialRecord>& log, bool with_timing = true) {
    for (const auto& r : log) os << to_json(r, with_timing).dump() << "\n";
}

}  // namespace qforge
