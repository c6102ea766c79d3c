// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero if any criterion fails.

#include <qforge/data.hpp>
#include <qforge/encodings.hpp>
#include <qforge/library.hpp>
#include <qforge/metrics.hpp>
#include <qforge/models.hpp>
#include <qforge/reproduce.hpp>
#include <qforge/search.hpp>
#include <qforge/training.hpp>

#include "../tests/test_util.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace qforge;
using namespace qforge::testing_util;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void fail(const std::string& s) {
        pass = false;
        notes.push_back("FAIL " + s);
    }
    void note(const std::string& s) { notes.push_back(s); }
    void check(bool ok, const std::string& s) { ok ? note(s) : fail(s); }
};

std::string f4(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char b[32];
    std::snprintf(b, sizeof b, "%.4f", v);
    return b;
}

std::string label(const ReferenceTable& t) { return to_string(t.arch) + " " + std::to_string(t.num_qubits) + "q"; }

// 1
Outcome threshold_formula() {
    Outcome o;
    const std::pair<int, double> cases[] = {{2, 0.4}, {3, 0.667}, {4, 0.824}, {9, 0.994}};
    for (auto [q, v] : cases) {
        const double got = haar_mean_entanglement(q);
        o.check(std::abs(got - v) <= 0.001, std::to_string(q) + "q: " + f4(got) + " vs " + f4(v));
    }
    for (const auto& t : reference_tables())
        if (std::abs(haar_mean_entanglement(t.num_qubits) - t.entgl_thr) > 0.001) o.fail(t.name + " thresholds row");
    return o;
}

// 2
Outcome library_triples() {
    Outcome o;
    int rows = 0, ok = 0;
    for (const auto& t : reference_tables())
        for (const auto& r : t.rows) {
            ++rows;
            const auto c = circuit_complexity(named_circuit(r.id, t.num_qubits, t.arch));
            if (c == r.complexity) {
                ++ok;
                continue;
            }
            o.fail(label(t) + " " + r.id + ": computed (" + std::to_string(c.params) + "," + std::to_string(c.depth) + "," +
                   std::to_string(c.gates) + ") vs printed (" + std::to_string(r.complexity.params) + "," +
                   std::to_string(r.complexity.depth) + "," + std::to_string(r.complexity.gates) + ")");
        }
    o.note(std::to_string(ok) + "/" + std::to_string(rows) + " rows match");
    return o;
}

// 3
Outcome metric_reproduction(int threads) {
    Outcome o;
    int cells = 0, ok = 0;
    for (const auto& t : reference_tables()) {
        if (t.num_qubits > 3) continue;
        const auto r = reproduce_table(t, {10, 2000, 0}, 3, threads);
        for (const auto& row : r.rows) {
            cells += 2;
            ok += row.expr.pass + row.entgl.pass;
            if (!row.expr.pass)
                o.fail(label(t) + " " + row.id + " expr " + f4(row.expr.computed) + " vs " + f4(row.expr.printed));
            if (!row.entgl.pass)
                o.fail(label(t) + " " + row.id + " entgl " + f4(row.entgl.computed) + " vs " + f4(row.entgl.printed));
        }
    }
    o.note(std::to_string(ok) + "/" + std::to_string(cells) + " cells within tolerance (expr 0.06, entgl 0.04)");
    const auto c1 = expressibility_regular(baseline_circuit(1, 9), {10, 2000, 0}, haar_fidelity_histogram(9));
    o.check(std::isinf(c1.mean), "regular 9q C1 expr = " + f4(c1.mean));
    return o;
}

// 4
Outcome worst_case() {
    Outcome o;
    const std::pair<int, double> cases[] = {{2, 12.95}, {3, 30.22}};
    for (auto [q, v] : cases) {
        const double got = worst_case_expressibility(haar_fidelity_histogram(q));
        o.check(std::abs(got - v) <= 0.5, std::to_string(q) + "q: " + f4(got) + " vs " + f4(v));
    }
    // a point mass on one class against the uniform 4-class target
    const std::vector<double> point{1, 0, 0, 0}, uniform4(4, 0.25);
    const double h = kl_divergence(point, uniform4);
    o.check(std::abs(h - 1.386) <= 0.01, "hybrid: " + f4(h) + " vs 1.386");
    return o;
}

// 5
Outcome objective_arithmetic() {
    Outcome o;
    int checked = 0;
    for (const auto& t : reference_tables()) {
        const auto thr = printed_thresholds(t);
        for (const auto& r : t.rows) {
            const double l = objective_lpqc(r.expr, r.entgl, r.complexity, thr);
            const std::string what = label(t) + " " + r.id + ": " + f4(l) + " vs printed " + f4(r.l_pqc);
            if (r.expr > t.expr_thr) {
                ++checked;
                const bool ok = std::isinf(l) ? std::isinf(r.l_pqc) : std::abs(l - r.l_pqc) <= 0.02;
                if (!ok) o.fail(what);
            } else if (std::abs(l - r.l_pqc) > 0.02) {
                o.note("reported, outside the criterion (expr <= thr): " + what);
            }
        }
    }
    o.note(std::to_string(checked) + " rows with expr > thr checked");
    return o;
}

// 6
Outcome memory() {
    Outcome o;
    const long long cases[][3] = {{4, 2, 2}, {8, 2, 2}, {16, 2, 2}, {8, 3, 2}, {16, 3, 2}};
    for (auto& c : cases) {
        const auto f = memory_bound(c[0], c[1], c[2]), l = memory_liveness_peak(c[0], c[1], c[2]);
        o.check(f == l, "(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) +
                            "): formula " + std::to_string(f) + " oracle " + std::to_string(l));
    }
    return o;
}

// 7
Outcome collapse() {
    Outcome o;
    Rng rng = make_rng(70);
    const GateKind kinds[] = {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::U3, GateKind::H,
                              GateKind::X,  GateKind::Y,  GateKind::Z,  GateKind::SX};
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        std::vector<Matrix> seq;
        Matrix product = Matrix::identity(2);
        const int len = 1 + t % 12;
        for (int i = 0; i < len; ++i) {
            const GateKind k = kinds[std::uniform_int_distribution<int>(0, 8)(rng)];
            seq.push_back(gate_matrix(k, random_params(gate_param_count(k), rng)));
            product = seq.back() * product;
        }
        worst = std::max(worst, collapse_u3(seq).to_matrix().max_abs_diff(product));
    }
    o.check(worst < 1e-10, "max reconstruction error " + std::to_string(worst));
    return o;
}

// 8
Outcome simulator() {
    Outcome o;
    Rng rng = make_rng(80);
    double worst = 0.0, unit = 0.0, norm = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int n = 1 + t % 3;
        const auto c = random_circuit(n, 1 + t % 20, rng);
        const auto p = random_params(c.num_params(), rng);
        const auto init = haar_state(n, rng);
        const auto dense = dense_chain(c, p);
        worst = std::max(worst, max_diff(run_circuit(c, p, init), apply_matrix(dense, init)));
        unit = std::max(unit, (dense.adjoint() * dense).max_abs_diff(Matrix::identity(dense.dim())));
    }
    for (GateKind k : all_gate_kinds)
        for (int t = 0; t < 1000; ++t) {
            const auto u = gate_matrix(k, random_params(gate_param_count(k), rng));
            unit = std::max(unit, (u.adjoint() * u).max_abs_diff(Matrix::identity(u.dim())));
        }
    for (int n = 1; n <= 6; ++n)
        for (int t = 0; t < 20; ++t) {
            const auto c = random_circuit(n, 50, rng);
            norm = std::max(norm, std::abs(run_circuit(c, random_params(c.num_params(), rng), haar_state(n, rng)).norm_squared() - 1));
        }
    o.check(worst < 1e-10, "statevector vs dense chain: " + std::to_string(worst));
    o.check(unit < 1e-10, "unitarity: " + std::to_string(unit));
    o.check(norm < 1e-9, "norm drift after 50 gates: " + std::to_string(norm));
    return o;
}

// 9
Outcome gradient() {
    Outcome o;
    Rng rng = make_rng(90);
    const GateKind rots[] = {GateKind::RX, GateKind::RY, GateKind::RZ};
    double worst = 0.0;
    for (int m = 0; m < 20; ++m) {
        const int n = 1 + m % 3;
        ParameterizedCircuit c(n);
        std::uniform_int_distribution<int> pick(0, 2), q(0, n - 1);
        for (int i = 0; i < 3 + m % 5; ++i) {
            c.add(rots[pick(rng)], {q(rng)}, {i});
            if (n > 1 && i % 2) {
                const int a = q(rng);
                c.add(GateKind::CX, {a, (a + 1) % n});
            }
        }
        auto loss = [&](std::span<const double> w) { return last_qubit_prob1(run_circuit(c, w, StateVector(n)), n - 1); };
        const auto p = random_params(c.num_params(), rng);
        const auto fd = finite_diff_gradient(loss, p, 1e-4);
        for (int j = 0; j < c.num_params(); ++j) {
            auto a = p, b = p;
            a[static_cast<std::size_t>(j)] += pi / 2;
            b[static_cast<std::size_t>(j)] -= pi / 2;
            worst = std::max(worst, std::abs(fd[static_cast<std::size_t>(j)] - (loss(a) - loss(b)) / 2));
        }
    }
    o.check(worst <= 1e-3, "max |finite difference - parameter shift| = " + std::to_string(worst));
    return o;
}

// 10
Outcome training_trend(int threads) {
    Outcome o;
    const auto raw = load_idx_dir(data_dir(std::filesystem::path(QFORGE_SOURCE_DIR) / "data" / "mnist"));
    PrepareOptions opt;
    opt.train_per_class = 500;
    opt.test_per_class = 250;
    const auto data = prepare(raw, opt);
    TrainConfig cfg;
    cfg.runs = 5;
    cfg.threads = threads;
    auto mean_final = [&](const std::string& name) {
        const auto runs = train_runs(make_classifier(find_grid_model(name)), data.train, data.test, cfg);
        double s = 0.0;
        std::string per;
        for (const auto& r : runs) {
            s += r.final_accuracy();
            per += " " + f4(r.final_accuracy());
        }
        o.note(name + " per-seed final accuracy:" + per);
        return s / static_cast<double>(runs.size());
    };
    const double a1 = mean_final("Rx-Ry-Rz-Rx-Ry->U3");
    const double a4 = mean_final("U3-U3-U3-U3->C5");
    const double a16 = mean_final("U3-U3-U3->Pool-C2");
    o.check(a1 >= 40.0 && a1 <= 62.0, "1q mean " + f4(a1) + " in [40, 62]");
    o.check(a4 >= a1 + 5.0, "4q mean " + f4(a4) + " >= 1q + 5 = " + f4(a1 + 5));
    o.check(a16 >= a4, "16q mean " + f4(a16) + " >= 4q mean " + f4(a4));
    return o;
}

// 11
Outcome ansatz_search(int threads) {
    Outcome o;
    SearchConfig cfg;
    cfg.num_qubits = 2;
    cfg.architecture = Architecture::Regular;
    cfg.num_trials = 2000;
    cfg.budget = {10, 2000, 0};
    cfg.seed = 11;
    cfg.threads = threads;
    cfg.proposal_batch = 1;
    const auto a = run_search(cfg);
    const auto b = run_search(cfg);
    std::ostringstream la, lb;
    write_trial_log(la, a.log, false);
    write_trial_log(lb, b.log, false);
    const auto& best = a.ranked.front();
    o.check(best.l_pqc <= 1.08, "best L_PQC " + f4(best.l_pqc) + " (expr " + f4(best.expr) + ", entgl " + f4(best.entgl) + ")");
    o.check(la.str() == lb.str(), "identical trial logs across two seeded runs");
    return o;
}

// 12
Outcome hybrid_suite() {
    Outcome o;
    Rng rng = make_rng(120);
    const std::vector<std::string> names{"C1", "C2", "C3", "C4", "C5", "AS"};
    int bad = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto v = t % 2 ? HybridVariant::TypeI : HybridVariant::TypeII;
        const auto m = hybrid_pyramid(v, names[static_cast<std::size_t>(t % 6)], t % 3 ? 4 : 8);
        const int size = t % 3 ? 4 : 8;
        const Image img(size, size, uniform_vector(rng, static_cast<std::size_t>(size * size), 0.0, pi - 1e-6));
        const double out = hybrid_forward(m, img, random_params(m.num_params(), rng));
        bad += !(out >= 0.0 && out <= 1.0);
    }
    o.check(bad == 0, "1000 random hybrid outputs in [0,1], violations: " + std::to_string(bad));

    HybridModel id;
    id.layers.push_back({2, 2, ParameterizedCircuit(4), "inline", std::nullopt});
    o.check(hybrid_forward(id, Image(2, 2), {}) == 0.0, "identity conv on zero input gives 0");

    ParameterizedCircuit u3(1);
    u3.add(GateKind::U3, {0}, {0, 1, 2});
    double gap = 0.0;
    for (int t = 0; t < 100; ++t) {
        HybridModel a, b;
        a.variant = HybridVariant::TypeI;
        a.layers.push_back({1, 1, u3, "inline", std::nullopt});
        b = a;
        b.variant = HybridVariant::TypeII;
        const Image img(1, 1, uniform(rng, 0, pi - 1e-6));
        const auto p = random_params(3, rng);
        gap = std::max(gap, std::abs(hybrid_forward(a, img, p) - hybrid_forward(b, img, p)));
    }
    o.check(gap < 1e-14, "Type I equals Type II for a 1x1 kernel (max gap " + std::to_string(gap) + ")");

    double reg = 0.0;
    for (const std::string name : {"U3-U3-U3-U3->C5", "U3-U3-U3->Pool-C2", "Rx-Ry-Rz-Rx-Ry->U3"}) {
        const auto m = find_grid_model(name);
        reg = std::max(reg, regular_forward(m, Image(32, 32), std::vector<double>(static_cast<std::size_t>(m.num_params()), 0.0)));
    }
    o.check(reg < 1e-14, "regular zero weights on a blank image give 0");

    double pool = 0.0;
    const std::vector<double> zero{0.0, 0.0};
    for (int r = 2; r <= 4; ++r)
        for (int c = 2; c <= 4; ++c) {
            const auto s0 = haar_state(r * c, rng);
            pool = std::max(pool, max_diff(apply_interpolation(s0, r, c, zero), s0));
            if (r % 2 == 0 && c % 2 == 0) {
                auto s = s0;
                for (auto [from, to] : pooling_arrows(r, c)) apply_pooling(s, from, to, 0, 0);
                pool = std::max(pool, max_diff(s, s0));
            }
        }
    o.check(pool < 1e-15, "zero-angle pooling and interpolation are the identity up to 4x4");
    return o;
}

}  // namespace

int main() {
    const int threads = default_threads();
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"threshold formula", threshold_formula},
        {"circuit library complexity triples", library_triples},
        {"metric reproduction at desk budget", [&] { return metric_reproduction(threads); }},
        {"worst-case expressibility", worst_case},
        {"objective arithmetic", objective_arithmetic},
        {"fragment memory bound", memory},
        {"single-qubit collapse", collapse},
        {"simulator oracle equivalence", simulator},
        {"gradient check", gradient},
        {"training trend", [&] { return training_trend(threads); }},
        {"ansatz search", [&] { return ansatz_search(threads); }},
        {"hybrid forward properties", hybrid_suite},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %2zu %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs);
        for (const auto& n : o.notes) std::printf("       %s\n", n.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
