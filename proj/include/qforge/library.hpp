#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "circuit.hpp"

namespace qforge {

enum class Architecture { Hybrid, Regular };

inline std::string to_string(Architecture a) { return a == Architecture::Hybrid ? "hybrid" : "regular"; }

inline Architecture parse_architecture(const std::string& s) {
    if (s == "hybrid") return Architecture::Hybrid;
    if (s == "regular") return Architecture::Regular;
    throw std::invalid_argument("unknown architecture: " + s);
}

namespace lib {

using G = GateKind;

inline void rotation_layer(ParameterizedCircuit& c, GateKind kind, int& slot) {
    for (int q = 0; q < c.num_qubits(); ++q) c.add(kind, {q}, {slot++});
}

// Hadamard wall, CZ chain from the bottom, Rx layer.
inline ParameterizedCircuit c1(int n) {
    ParameterizedCircuit c(n);
    for (int q = 0; q < n; ++q) c.add(G::H, {q});
    for (int q = n - 2; q >= 0; --q) c.add(G::CZ, {q, q + 1});
    int slot = 0;
    rotation_layer(c, G::RX, slot);
    return c;
}

// Ry layer followed by a CX tree that funnels into the last qubit.
inline ParameterizedCircuit c2(int n) {
    ParameterizedCircuit c(n);
    int slot = 0;
    rotation_layer(c, G::RY, slot);
    switch (n) {
        case 2:
            c.add(G::CX, {0, 1}).add(G::RY, {1}, {slot++});
            break;
        case 3:
            c.add(G::CX, {0, 1}).add(G::CX, {1, 2}).add(G::RY, {2}, {slot++});
            break;
        case 4:
            c.add(G::CX, {0, 1}).add(G::CX, {2, 3});
            c.add(G::RY, {1}, {slot++}).add(G::RY, {3}, {slot++});
            c.add(G::CX, {1, 3}).add(G::RY, {3}, {slot++});
            break;
        case 9:
            for (int q = 0; q < 8; q += 2) c.add(G::CX, {q, q + 1});
            for (int q = 1; q < 8; q += 2) c.add(G::RY, {q}, {slot++});
            c.add(G::CX, {1, 3}).add(G::CX, {5, 7});
            c.add(G::RY, {3}, {slot++}).add(G::RY, {7}, {slot++});
            c.add(G::CX, {3, 7}).add(G::CX, {7, 8}).add(G::RY, {8}, {slot++});
            break;
        default:
            throw std::invalid_argument("circuit 2 is defined for 2, 3, 4 and 9 qubits");
    }
    return c;
}

// Rx and Rz layers, CX chain from the bottom.
inline ParameterizedCircuit c3(int n) {
    ParameterizedCircuit c(n);
    int slot = 0;
    rotation_layer(c, G::RX, slot);
    rotation_layer(c, G::RZ, slot);
    for (int q = n - 1; q >= 1; --q) c.add(G::CX, {q, q - 1});
    return c;
}

// Ry layer, CZ ring, Ry layer.
inline ParameterizedCircuit c4(int n) {
    ParameterizedCircuit c(n);
    int slot = 0;
    rotation_layer(c, G::RY, slot);
    for (int q = n - 2; q >= 0; --q) c.add(G::CZ, {q, q + 1});
    if (n > 2) c.add(G::CZ, {0, n - 1});
    rotation_layer(c, G::RY, slot);
    return c;
}

// Ry layers interleaved with two CX rings of opposite orientation.
inline ParameterizedCircuit c5(int n) {
    ParameterizedCircuit c(n);
    int slot = 0;
    rotation_layer(c, G::RY, slot);
    if (n == 2) {
        c.add(G::CX, {1, 0});
        rotation_layer(c, G::RY, slot);
        c.add(G::CX, {0, 1});
        return c;
    }
    c.add(G::CX, {n - 1, 0});
    for (int q = n - 2; q >= 0; --q) c.add(G::CX, {q, q + 1});
    rotation_layer(c, G::RY, slot);
    if (n <= 4) {
        c.add(G::CX, {n - 1, n - 2});
        c.add(G::CX, {0, n - 1});
        for (int q = 1; q <= n - 2; ++q) c.add(G::CX, {q, q - 1});
    } else {
        for (int q = n - 1; q >= 2; --q) c.add(G::CX, {q, q - 1});
        c.add(G::CX, {0, n - 1});
        c.add(G::CX, {1, 0});
    }
    return c;
}

// Ry layers interleaved with two CRZ rings.
inline ParameterizedCircuit c6(int n) {
    ParameterizedCircuit c(n);
    int slot = 0;
    rotation_layer(c, G::RY, slot);
    if (n == 2) {
        c.add(G::CRZ, {1, 0}, {slot++});
        rotation_layer(c, G::RY, slot);
        c.add(G::CRZ, {0, 1}, {slot++});
        return c;
    }
    if (n != 3) throw std::invalid_argument("circuit 6 is defined for 2 and 3 qubits");
    c.add(G::CRZ, {2, 0}, {slot++}).add(G::CRZ, {1, 2}, {slot++}).add(G::CRZ, {0, 1}, {slot++});
    rotation_layer(c, G::RY, slot);
    c.add(G::CRZ, {2, 1}, {slot++}).add(G::CRZ, {0, 2}, {slot++}).add(G::CRZ, {1, 0}, {slot++});
    return c;
}

inline ParameterizedCircuit hybrid_searched(int n) {
    ParameterizedCircuit c(n);
    switch (n) {
        case 2:
            c.add(G::Z, {0}).add(G::RY, {1}, {0}).add(G::CZ, {0, 1}).add(G::CRX, {1, 0}, {0}).add(G::RY, {1}, {1});
            return c;
        case 3:
            c.add(G::SX, {1}).add(G::CX, {0, 2}).add(G::CY, {1, 0}).add(G::RY, {2}, {0}).add(G::U3, {2}, {1, 0, 2});
            return c;
        case 4:
            c.add(G::CRY, {0, 1}, {0}).add(G::U3, {3}, {0, 0, 0}).add(G::CRY, {1, 2}, {0}).add(G::SX, {0});
            c.add(G::RY, {3}, {1}).add(G::CY, {3, 1}).add(G::CY, {0, 2});
            return c;
        case 9:
            c.add(G::U3, {0}, {3, 4, 5}).add(G::ECR, {3, 5}).add(G::Z, {7}).add(G::X, {8}).add(G::X, {4});
            c.add(G::U3, {8}, {0, 1, 2}).add(G::CY, {5, 1}).add(G::RX, {8}, {4}).add(G::CY, {1, 4});
            c.add(G::RZ, {5}, {6}).add(G::ECR, {4, 2}).add(G::U3, {5}, {7, 8, 5}).add(G::CY, {2, 6});
            c.add(G::CZ, {6, 8}).add(G::ECR, {4, 2}).add(G::CX, {6, 0}).add(G::CRX, {4, 6}, {5});
            c.add(G::CY, {0, 7}).add(G::ECR, {0, 3}).add(G::RZ, {4}, {6});
            return c;
        default:
            throw std::invalid_argument("no searched hybrid circuit for this qubit count");
    }
}

inline ParameterizedCircuit regular_searched(int n) {
    ParameterizedCircuit c(n);
    switch (n) {
        case 2:
            c.add(G::RZ, {0}, {0}).add(G::Y, {1}).add(G::CRZ, {0, 1}, {0}).add(G::U3, {0}, {0, 0, 0});
            c.add(G::RY, {1}, {0}).add(G::RY, {1}, {0}).add(G::ECR, {1, 0}).add(G::U3, {0}, {1, 0, 0});
            return c;
        case 3:
            c.add(G::RX, {0}, {0}).add(G::H, {1}).add(G::RZ, {2}, {1}).add(G::U3, {0}, {0, 0, 0});
            c.add(G::RZ, {2}, {1}).add(G::RY, {0}, {0}).add(G::CY, {0, 1}).add(G::ECR, {1, 2});
            c.add(G::CRX, {2, 0}, {1}).add(G::U3, {1}, {2, 1, 2});
            return c;
        case 4:
            // The drawing carries one rotation with an unindexed angle; it is bound to slot 0.
            c.add(G::Z, {0}).add(G::RZ, {1}, {0}).add(G::U3, {3}, {0, 0, 0}).add(G::ECR, {1, 2});
            c.add(G::CX, {2, 1}).add(G::U3, {2}, {0, 0, 0}).add(G::CX, {2, 3}).add(G::RY, {1}, {0});
            c.add(G::Y, {0}).add(G::U3, {1}, {0, 0, 0}).add(G::Z, {2}).add(G::CRZ, {1, 0}, {2});
            c.add(G::RZ, {2}, {1}).add(G::Y, {1}).add(G::RX, {2}, {2}).add(G::CRY, {3, 1}, {2});
            c.add(G::RZ, {1}, {1}).add(G::U3, {2}, {2, 2, 1}).add(G::RY, {3}, {3}).add(G::SX, {2});
            return c;
        case 9:
            c.add(G::X, {0}).add(G::U3, {1}, {1, 2, 3}).add(G::RZ, {3}, {2}).add(G::RY, {4}, {0});
            c.add(G::H, {5}).add(G::RX, {4}, {1}).add(G::ECR, {1, 8}).add(G::CY, {4, 6}).add(G::SX, {1});
            c.add(G::CY, {8, 0}).add(G::RY, {0}, {4}).add(G::ECR, {5, 4}).add(G::H, {6}).add(G::RY, {8}, {4});
            c.add(G::U3, {6}, {1, 4, 5}).add(G::RZ, {8}, {8}).add(G::CRX, {4, 7}, {4}).add(G::ECR, {1, 6});
            c.add(G::SX, {1}).add(G::RX, {4}, {6}).add(G::SX, {6}).add(G::CRX, {6, 3}, {3}).add(G::SX, {3});
            c.add(G::RZ, {6}, {6}).add(G::ECR, {0, 3}).add(G::SX, {0}).add(G::CX, {0, 7}).add(G::ECR, {7, 2});
            c.add(G::CX, {0, 5}).add(G::ECR, {1, 7}).add(G::CY, {6, 0}).add(G::CRZ, {7, 5}, {6});
            c.add(G::CRX, {3, 6}, {7}).add(G::CX, {3, 1});
            return c;
        default:
            throw std::invalid_argument("no searched regular circuit for this qubit count");
    }
}

}  // namespace lib

// Baseline convolution circuits 1..6 (6 only for 2 and 3 qubits).
inline ParameterizedCircuit baseline_circuit(int index, int num_qubits) {
    if (num_qubits != 2 && num_qubits != 3 && num_qubits != 4 && num_qubits != 9)
        throw std::invalid_argument("baseline circuits exist for 2, 3, 4 and 9 qubits");
    switch (index) {
        case 1: return lib::c1(num_qubits);
        case 2: return lib::c2(num_qubits);
        case 3: return lib::c3(num_qubits);
        case 4: return lib::c4(num_qubits);
        case 5: return lib::c5(num_qubits);
        case 6: return lib::c6(num_qubits);
        default: throw std::invalid_argument("baseline circuit index must be 1..6");
    }
}

inline ParameterizedCircuit searched_circuit(Architecture arch, int num_qubits) {
    return arch == Architecture::Hybrid ? lib::hybrid_searched(num_qubits) : lib::regular_searched(num_qubits);
}

// Resolve "C1".."C6" or "AS" to a circuit.
inline ParameterizedCircuit named_circuit(const std::string& name, int num_qubits, Architecture arch) {
    if (name == "AS" || name == "as") return searched_circuit(arch, num_qubits);
    if (name.size() == 2 && (name[0] == 'C' || name[0] == 'c') && name[1] >= '1' && name[1] <= '6')
        return baseline_circuit(name[1] - '0', num_qubits);
    throw std::invalid_argument("unknown circuit name: " + name);
}

}  // namespace qforge
