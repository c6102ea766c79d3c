#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gates.hpp"

namespace qforge {

// Dense statevector. Qubit q is bit q of the amplitude index (little-endian).
class StateVector {
public:
    StateVector() = default;

    explicit StateVector(int num_qubits) : n_(num_qubits) {
        if (num_qubits < 1 || num_qubits > 30) throw std::invalid_argument("StateVector: bad qubit count");
        amps_.assign(std::size_t{1} << num_qubits, cplx{});
        amps_[0] = 1.0;
    }

    StateVector(int num_qubits, std::vector<cplx> amplitudes) : n_(num_qubits), amps_(std::move(amplitudes)) {
        if (num_qubits < 1 || num_qubits > 30) throw std::invalid_argument("StateVector: bad qubit count");
        if (amps_.size() != (std::size_t{1} << num_qubits))
            throw std::invalid_argument("StateVector: amplitude count must be 2^num_qubits");
        double norm = 0.0;
        for (const auto& a : amps_) norm += std::norm(a);
        if (std::abs(norm - 1.0) > 1e-8) throw std::invalid_argument("StateVector: amplitudes are not normalized");
    }

    static StateVector basis(int num_qubits, std::size_t index) {
        StateVector s(num_qubits);
        if (index >= s.amps_.size()) throw std::out_of_range("StateVector::basis: index out of range");
        s.amps_[0] = 0.0;
        s.amps_[index] = 1.0;
        return s;
    }

    // Tensor product of single-qubit states, factors[q] is the state of qubit q.
    static StateVector product(std::span<const std::array<cplx, 2>> factors) {
        const int n = static_cast<int>(factors.size());
        StateVector s(n);
        s.amps_[0] = factors[0][0];
        s.amps_[1] = factors[0][1];
        std::size_t len = 2;
        for (int q = 1; q < n; ++q) {
            for (std::size_t i = 0; i < len; ++i) {
                s.amps_[i + len] = s.amps_[i] * factors[q][1];
                s.amps_[i] *= factors[q][0];
            }
            len <<= 1;
        }
        return s;
    }

    int num_qubits() const { return n_; }
    std::size_t dim() const { return amps_.size(); }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    const cplx& operator[](std::size_t i) const { return amps_[i]; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return s;
    }

    // In-place kernels. Public state values are only mutated by the owner of a
    // temporary (see run_circuit), which keeps the free functions pure.
    void apply_1q(int q, const Matrix& u) {
        check_qubit(q);
        const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
        const std::size_t stride = std::size_t{1} << q;
        const std::size_t dim = amps_.size();
        for (std::size_t base = 0; base < dim; base += 2 * stride)
            for (std::size_t i = base; i < base + stride; ++i) {
                const cplx a0 = amps_[i], a1 = amps_[i + stride];
                amps_[i] = u00 * a0 + u01 * a1;
                amps_[i + stride] = u10 * a0 + u11 * a1;
            }
    }

    // `u` is a 4x4 matrix in the basis 2*bit(first) + bit(second).
    void apply_2q(int first, int second, const Matrix& u) {
        check_qubit(first);
        check_qubit(second);
        if (first == second) throw std::invalid_argument("apply_2q: repeated qubit");
        const std::size_t bf = std::size_t{1} << first, bs = std::size_t{1} << second;
        const std::size_t dim = amps_.size();
        cplx m[16];
        for (int i = 0; i < 16; ++i) m[i] = u.data()[i];
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & (bf | bs)) continue;
            const std::size_t idx[4] = {i, i | bs, i | bf, i | bf | bs};
            const cplx a[4] = {amps_[idx[0]], amps_[idx[1]], amps_[idx[2]], amps_[idx[3]]};
            for (int r = 0; r < 4; ++r)
                amps_[idx[r]] = m[4 * r] * a[0] + m[4 * r + 1] * a[1] + m[4 * r + 2] * a[2] + m[4 * r + 3] * a[3];
        }
    }

    // Apply `u` to `target` on the subspace where `control` reads `control_value`.
    void apply_controlled_1q(int control, int target, const Matrix& u, bool control_value = true) {
        check_qubit(control);
        check_qubit(target);
        if (control == target) throw std::invalid_argument("apply_controlled_1q: repeated qubit");
        const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
        const std::size_t bc = std::size_t{1} << control, bt = std::size_t{1} << target;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (static_cast<bool>(i & bc) != control_value || (i & bt)) continue;
            const cplx a0 = amps_[i], a1 = amps_[i | bt];
            amps_[i] = u00 * a0 + u01 * a1;
            amps_[i | bt] = u10 * a0 + u11 * a1;
        }
    }

private:
    void check_qubit(int q) const {
        if (q < 0 || q >= n_) throw std::out_of_range("qubit index out of range");
    }

    int n_ = 0;
    std::vector<cplx> amps_;
};

inline double fidelity(const StateVector& a, const StateVector& b) {
    if (a.num_qubits() != b.num_qubits()) throw std::invalid_argument("fidelity: dimension mismatch");
    cplx overlap{};
    for (std::size_t i = 0; i < a.dim(); ++i) overlap += std::conj(a[i]) * b[i];
    return std::min(1.0, std::norm(overlap));
}

// Born probability of reading |1> on `qubit`.
inline double last_qubit_prob1(const StateVector& s, int qubit) {
    if (qubit < 0 || qubit >= s.num_qubits()) throw std::out_of_range("last_qubit_prob1: qubit out of range");
    const std::size_t bit = std::size_t{1} << qubit;
    double p = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i)
        if (i & bit) p += std::norm(s[i]);
    return std::clamp(p, 0.0, 1.0);
}

// Reduced 2x2 density matrix of one qubit.
inline std::array<cplx, 4> reduced_density(const StateVector& s, int qubit) {
    if (qubit < 0 || qubit >= s.num_qubits()) throw std::out_of_range("reduced_density: qubit out of range");
    const std::size_t bit = std::size_t{1} << qubit;
    double r00 = 0.0, r11 = 0.0;
    cplx r01{};
    for (std::size_t i = 0; i < s.dim(); ++i) {
        if (i & bit) continue;
        const cplx a0 = s[i], a1 = s[i | bit];
        r00 += std::norm(a0);
        r11 += std::norm(a1);
        r01 += a0 * std::conj(a1);
    }
    return {r00, r01, std::conj(r01), r11};
}

inline double single_qubit_purity(const StateVector& s, int qubit) {
    if (s.num_qubits() < 2) throw std::invalid_argument("single_qubit_purity: needs at least two qubits");
    const auto rho = reduced_density(s, qubit);
    return std::norm(rho[0]) + std::norm(rho[3]) + 2.0 * std::norm(rho[1]);
}

}  // namespace qforge
