#pragma once

#include <qforge/circuit.hpp>
#include <qforge/random.hpp>

#include <algorithm>
#include <numeric>

namespace qforge::testing_util {

// Embed a gate's local matrix into the full register by index arithmetic.
// Local index = sum of bit(qubits[j]) * 2^(k-1-j), so the first operand is the
// most significant local bit.
inline Matrix embed(const Matrix& local, const std::vector<int>& qubits, int n) {
    const std::size_t dim = std::size_t{1} << n;
    std::size_t mask = 0;
    for (int q : qubits) mask |= std::size_t{1} << q;
    auto loc = [&](std::size_t i) {
        std::size_t l = 0;
        for (int q : qubits) l = (l << 1) | ((i >> q) & 1);
        return l;
    };
    Matrix full(dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            if ((r & ~mask) == (c & ~mask)) full(r, c) = local(loc(r), loc(c));
    return full;
}

inline Matrix dense_chain(const ParameterizedCircuit& c, std::span<const double> params) {
    Matrix u = Matrix::identity(std::size_t{1} << c.num_qubits());
    for (const auto& g : c.gates()) {
        std::vector<double> p;
        for (int s : g.param_slots) p.push_back(params[static_cast<std::size_t>(s)]);
        u = embed(gate_matrix(g.kind, p), g.qubits, c.num_qubits()) * u;
    }
    return u;
}

inline ParameterizedCircuit random_circuit(int n, int num_gates, Rng& rng, bool share_params = true) {
    ParameterizedCircuit c(n);
    std::uniform_int_distribution<int> pick_kind(0, static_cast<int>(all_gate_kinds.size()) - 1);
    int next_slot = 0;
    for (int i = 0; i < num_gates; ++i) {
        GateKind k = all_gate_kinds[static_cast<std::size_t>(pick_kind(rng))];
        if (n == 1 && gate_arity(k) == 2) k = GateKind::U3;
        std::vector<int> qs(static_cast<std::size_t>(n));
        std::iota(qs.begin(), qs.end(), 0);
        std::shuffle(qs.begin(), qs.end(), rng);
        qs.resize(static_cast<std::size_t>(gate_arity(k)));
        std::vector<int> slots;
        for (int p = 0; p < gate_param_count(k); ++p) {
            if (share_params && next_slot > 0 && uniform(rng, 0, 1) < 0.3)
                slots.push_back(std::uniform_int_distribution<int>(0, next_slot - 1)(rng));
            else
                slots.push_back(next_slot++);
        }
        c.add(k, qs, slots);
    }
    return c;
}

inline std::vector<double> random_params(int count, Rng& rng) {
    return uniform_vector(rng, static_cast<std::size_t>(count), 0.0, 2 * pi);
}

inline StateVector apply_matrix(const Matrix& u, const StateVector& s) {
    std::vector<cplx> out(s.dim());
    for (std::size_t r = 0; r < s.dim(); ++r)
        for (std::size_t c = 0; c < s.dim(); ++c) out[r] += u(r, c) * s[c];
    return StateVector(s.num_qubits(), std::move(out));
}

inline double max_diff(const StateVector& a, const StateVector& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace qforge::testing_util
