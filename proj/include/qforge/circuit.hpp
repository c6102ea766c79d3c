#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gates.hpp"
#include "state.hpp"

namespace qforge {

struct GateApplication {
    GateKind kind = GateKind::H;
    std::vector<int> qubits;
    std::vector<int> param_slots;

    bool operator==(const GateApplication&) const = default;
};

struct Complexity {
    int params = 0;
    int depth = 0;
    int gates = 0;

    bool operator==(const Complexity&) const = default;
};

class ParameterizedCircuit {
public:
    ParameterizedCircuit() = default;
    explicit ParameterizedCircuit(int num_qubits) : n_(num_qubits) {
        if (num_qubits < 1) throw std::invalid_argument("ParameterizedCircuit: needs at least one qubit");
    }

    ParameterizedCircuit(int num_qubits, std::vector<GateApplication> gates) : ParameterizedCircuit(num_qubits) {
        for (auto& g : gates) add(std::move(g));
    }

    ParameterizedCircuit& add(GateApplication g) {
        validate(g);
        for (int s : g.param_slots) num_params_ = std::max(num_params_, s + 1);
        gates_.push_back(std::move(g));
        return *this;
    }

    ParameterizedCircuit& add(GateKind kind, std::vector<int> qubits, std::vector<int> slots = {}) {
        return add(GateApplication{kind, std::move(qubits), std::move(slots)});
    }

    int num_qubits() const { return n_; }
    int num_params() const { return num_params_; }
    const std::vector<GateApplication>& gates() const { return gates_; }

    bool operator==(const ParameterizedCircuit&) const = default;

private:
    void validate(const GateApplication& g) const {
        if (static_cast<int>(g.qubits.size()) != gate_arity(g.kind))
            throw std::invalid_argument("gate " + std::string(gate_name(g.kind)) + ": wrong number of qubits");
        if (static_cast<int>(g.param_slots.size()) != gate_param_count(g.kind))
            throw std::invalid_argument("gate " + std::string(gate_name(g.kind)) + ": wrong number of parameter slots");
        for (int q : g.qubits)
            if (q < 0 || q >= n_) throw std::out_of_range("gate qubit index out of range");
        if (g.qubits.size() == 2 && g.qubits[0] == g.qubits[1])
            throw std::invalid_argument("gate qubits must be distinct");
        for (int s : g.param_slots)
            if (s < 0) throw std::invalid_argument("negative parameter slot");
    }

    int n_ = 0;
    int num_params_ = 0;
    std::vector<GateApplication> gates_;
};

namespace detail {

inline void apply_in_place(StateVector& s, const GateApplication& g, std::span<const double> params) {
    double local[3];
    for (std::size_t i = 0; i < g.param_slots.size(); ++i) {
        const int slot = g.param_slots[i];
        if (slot >= static_cast<int>(params.size())) throw std::out_of_range("parameter slot not bound");
        local[i] = params[static_cast<std::size_t>(slot)];
    }
    const std::span<const double> p(local, g.param_slots.size());
    switch (g.kind) {
        case GateKind::CX: s.apply_controlled_1q(g.qubits[0], g.qubits[1], mat::pauli_x()); return;
        case GateKind::CY: s.apply_controlled_1q(g.qubits[0], g.qubits[1], mat::pauli_y()); return;
        case GateKind::CZ: s.apply_controlled_1q(g.qubits[0], g.qubits[1], mat::pauli_z()); return;
        case GateKind::CRX: s.apply_controlled_1q(g.qubits[0], g.qubits[1], mat::rx(p[0])); return;
        case GateKind::CRY: s.apply_controlled_1q(g.qubits[0], g.qubits[1], mat::ry(p[0])); return;
        case GateKind::CRZ: s.apply_controlled_1q(g.qubits[0], g.qubits[1], mat::rz(p[0])); return;
        case GateKind::ECR: s.apply_2q(g.qubits[0], g.qubits[1], gate_matrix(g.kind, p)); return;
        default: s.apply_1q(g.qubits[0], gate_matrix(g.kind, p)); return;
    }
}

inline void run_in_place(StateVector& s, const ParameterizedCircuit& c, std::span<const double> params) {
    if (static_cast<int>(params.size()) != c.num_params())
        throw std::invalid_argument("run_circuit: parameter vector length does not match the circuit");
    if (s.num_qubits() != c.num_qubits()) throw std::invalid_argument("run_circuit: qubit count mismatch");
    for (const auto& g : c.gates()) apply_in_place(s, g, params);
}

}  // namespace detail

inline StateVector apply_gate(StateVector state, const GateApplication& app, std::span<const double> params) {
    for (int q : app.qubits)
        if (q < 0 || q >= state.num_qubits()) throw std::out_of_range("apply_gate: qubit index out of range");
    detail::apply_in_place(state, app, params);
    return state;
}

inline StateVector run_circuit(const ParameterizedCircuit& c, std::span<const double> params, StateVector initial) {
    detail::run_in_place(initial, c, params);
    return initial;
}

inline Complexity circuit_complexity(const ParameterizedCircuit& c) {
    std::vector<int> level(static_cast<std::size_t>(c.num_qubits()), 0);
    int depth = 0;
    for (const auto& g : c.gates()) {
        int l = 0;
        for (int q : g.qubits) l = std::max(l, level[static_cast<std::size_t>(q)]);
        ++l;
        for (int q : g.qubits) level[static_cast<std::size_t>(q)] = l;
        depth = std::max(depth, l);
    }
    return {c.num_params(), depth, static_cast<int>(c.gates().size())};
}

// Full unitary of a bound circuit by explicit matrix chain, for small circuits.
inline Matrix circuit_unitary(const ParameterizedCircuit& c, std::span<const double> params) {
    const std::size_t dim = std::size_t{1} << c.num_qubits();
    Matrix u(dim);
    for (std::size_t col = 0; col < dim; ++col) {
        StateVector s = run_circuit(c, params, StateVector::basis(c.num_qubits(), col));
        for (std::size_t row = 0; row < dim; ++row) u(row, col) = s[row];
    }
    return u;
}

inline nlohmann::json to_json(const ParameterizedCircuit& c) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto& g : c.gates())
        gates.push_back({{"kind", std::string(gate_name(g.kind))}, {"qubits", g.qubits}, {"param_slots", g.param_slots}});
    return {{"num_qubits", c.num_qubits()}, {"num_params", c.num_params()}, {"gates", gates}};
}

inline ParameterizedCircuit circuit_from_json(const nlohmann::json& j) {
    ParameterizedCircuit c(j.at("num_qubits").get<int>());
    for (const auto& g : j.at("gates"))
        c.add(parse_gate_kind(g.at("kind").get<std::string>()), g.at("qubits").get<std::vector<int>>(),
              g.value("param_slots", std::vector<int>{}));
    if (j.contains("num_params") && j.at("num_params").get<int>() != c.num_params())
        throw std::invalid_argument("circuit json: num_params does not match the highest parameter slot");
    return c;
}

}  // namespace qforge
