#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "library.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "reference.hpp"

namespace qforge {

// Tolerances for comparing recomputed metrics against the printed tables.
struct ReproTolerance {
    double expr = 0.06;
    double entgl = 0.04;
    double hybrid_expr_thr = 0.005;
    double regular_expr_thr = 0.01;
    double entgl_thr = 0.001;
    double l_pqc = 0.02;  // informational, follows from the other two
};

struct ReproCell {
    double printed = 0.0;
    double computed = 0.0;
    bool pass = false;

    double delta() const {
        if (std::isinf(printed) && std::isinf(computed)) return 0.0;
        return std::abs(printed - computed);
    }
};

struct ReproRow {
    std::string id;
    Complexity printed_complexity, computed_complexity;
    ReproCell expr, entgl, l_pqc;
};

struct ReproTable {
    const ReferenceTable* table = nullptr;
    std::vector<ReproRow> rows;
    ReproCell expr_thr, entgl_thr;
};

namespace detail {
inline ReproCell compare(double printed, double computed, double tol) {
    ReproCell c{printed, computed, false};
    if (std::isinf(printed) || std::isinf(computed)) c.pass = std::isinf(printed) && std::isinf(computed);
    else c.pass = std::abs(printed - computed) <= tol;
    return c;
}
}  // namespace detail

// Recomputes every row of `t`, averaging metric means over `num_seeds` seeds
// (budget.seed, budget.seed + 1, ...). Expressibility is +inf if any seed gives +inf.
inline ReproTable reproduce_table(const ReferenceTable& t, SamplingBudget budget, int num_seeds, int threads,
                                  const ReproTolerance& tol = {}, const MetricOptions& opt = {}) {
    if (num_seeds < 1) throw std::invalid_argument("reproduce_table: need at least one seed");
    ReproTable out;
    out.table = &t;
    out.rows.resize(t.rows.size());
    const ThresholdSet printed = printed_thresholds(t, opt);
    parallel_for(t.rows.size(), threads, [&](std::size_t i) {
        const auto& ref = t.rows[i];
        const auto c = named_circuit(ref.id, t.num_qubits, t.arch);
        double expr = 0.0, entgl = 0.0;
        for (int s = 0; s < num_seeds; ++s) {
            SamplingBudget b = budget;
            b.seed = budget.seed + static_cast<std::uint64_t>(s);
            const auto rep = evaluate_circuit(c, t.arch, b, printed, opt);
            expr += rep.expr_mean;
            entgl += rep.entgl_mean;
        }
        expr /= num_seeds;
        entgl /= num_seeds;
        auto& row = out.rows[i];
        row.id = ref.id;
        row.printed_complexity = ref.complexity;
        row.computed_complexity = circuit_complexity(c);
        row.expr = detail::compare(ref.expr, expr, tol.expr);
        row.entgl = detail::compare(ref.entgl, entgl, tol.entgl);
        const double l = objective_lpqc(expr, entgl, row.computed_complexity, printed);
        row.l_pqc = detail::compare(ref.l_pqc, l, tol.l_pqc);
    });
    const ThresholdSet derived = default_thresholds(t.arch, t.num_qubits, opt);
    out.expr_thr = detail::compare(t.expr_thr, derived.expr_thr,
                                   t.arch == Architecture::Hybrid ? tol.hybrid_expr_thr : tol.regular_expr_thr);
    out.entgl_thr = detail::compare(t.entgl_thr, derived.entgl_thr, tol.entgl_thr);
    return out;
}

}  // namespace qforge
