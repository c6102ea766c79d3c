#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"
#include "state.hpp"

namespace qforge {

// Density matrix stored as a vector over 2n bits: column bits 0..n-1, row
// bits n..2n-1. Local qubit q is bit q of both row and column indices.
class DensityMatrix {
public:
    DensityMatrix() = default;

    static DensityMatrix pure(const std::array<cplx, 2>& ket) {
        DensityMatrix d;
        d.n_ = 1;
        d.data_ = {ket[0] * std::conj(ket[0]), ket[0] * std::conj(ket[1]), ket[1] * std::conj(ket[0]),
                   ket[1] * std::conj(ket[1])};
        return d;
    }

    static DensityMatrix from_state(const StateVector& s) {
        DensityMatrix d;
        d.n_ = s.num_qubits();
        const std::size_t dim = s.dim();
        d.data_.resize(dim * dim);
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) d.data_[r * dim + c] = s[r] * std::conj(s[c]);
        return d;
    }

    int num_qubits() const { return n_; }
    std::size_t dim() const { return std::size_t{1} << n_; }
    cplx operator()(std::size_t r, std::size_t c) const { return data_[r * dim() + c]; }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) t += (*this)(i, i).real();
        return t;
    }

    // U rho U^dagger
    void apply_1q(int q, const Matrix& u) {
        check(q);
        pair_kernel(n_ + q, u(0, 0), u(0, 1), u(1, 0), u(1, 1));
        pair_kernel(q, std::conj(u(0, 0)), std::conj(u(0, 1)), std::conj(u(1, 0)), std::conj(u(1, 1)));
    }

    void apply_controlled_1q(int control, int target, const Matrix& u, bool control_value = true) {
        check(control);
        check(target);
        if (control == target) throw std::invalid_argument("DensityMatrix: repeated qubit");
        controlled_kernel(n_ + control, n_ + target, control_value, u(0, 0), u(0, 1), u(1, 0), u(1, 1));
        controlled_kernel(control, target, control_value, std::conj(u(0, 0)), std::conj(u(0, 1)), std::conj(u(1, 0)),
                          std::conj(u(1, 1)));
    }

    // `u` in the basis 2*bit(first) + bit(second).
    void apply_2q(int first, int second, const Matrix& u) {
        check(first);
        check(second);
        if (first == second) throw std::invalid_argument("DensityMatrix: repeated qubit");
        std::array<cplx, 16> m{}, mc{};
        for (std::size_t i = 0; i < 16; ++i) {
            m[i] = u.data()[i];
            mc[i] = std::conj(m[i]);
        }
        quad_kernel(n_ + first, n_ + second, m);
        quad_kernel(first, second, mc);
    }

    double prob1(int q) const {
        check(q);
        const std::size_t bit = std::size_t{1} << q;
        double p = 0.0;
        for (std::size_t i = 0; i < dim(); ++i)
            if (i & bit) p += (*this)(i, i).real();
        return std::clamp(p, 0.0, 1.0);
    }

    // Trace out local qubit q; higher qubits shift down by one.
    DensityMatrix trace_out(int q) const {
        check(q);
        if (n_ == 1) throw std::invalid_argument("DensityMatrix: cannot trace out the last qubit");
        DensityMatrix out;
        out.n_ = n_ - 1;
        const std::size_t nd = out.dim();
        out.data_.assign(nd * nd, cplx{});
        const std::size_t low = (std::size_t{1} << q) - 1;
        auto expand = [&](std::size_t i, std::size_t b) { return (i & low) | (b << q) | ((i & ~low) << 1); };
        for (std::size_t r = 0; r < nd; ++r)
            for (std::size_t c = 0; c < nd; ++c)
                out.data_[r * nd + c] = (*this)(expand(r, 0), expand(c, 0)) + (*this)(expand(r, 1), expand(c, 1));
        return out;
    }

    // a (x) b with a's qubits as the low local indices.
    friend DensityMatrix merge(const DensityMatrix& a, const DensityMatrix& b) {
        DensityMatrix out;
        out.n_ = a.n_ + b.n_;
        const std::size_t da = a.dim(), db = b.dim(), d = out.dim();
        out.data_.resize(d * d);
        for (std::size_t rb = 0; rb < db; ++rb)
            for (std::size_t ra = 0; ra < da; ++ra)
                for (std::size_t cb = 0; cb < db; ++cb) {
                    const cplx vb = b(rb, cb);
                    for (std::size_t ca = 0; ca < da; ++ca)
                        out.data_[(rb * da + ra) * d + cb * da + ca] = a(ra, ca) * vb;
                }
        return out;
    }

private:
    void check(int q) const {
        if (q < 0 || q >= n_) throw std::out_of_range("DensityMatrix: qubit out of range");
    }

    void pair_kernel(int bitpos, cplx u00, cplx u01, cplx u10, cplx u11) {
        const std::size_t stride = std::size_t{1} << bitpos;
        for (std::size_t base = 0; base < data_.size(); base += 2 * stride)
            for (std::size_t i = base; i < base + stride; ++i) {
                const cplx a0 = data_[i], a1 = data_[i + stride];
                data_[i] = u00 * a0 + u01 * a1;
                data_[i + stride] = u10 * a0 + u11 * a1;
            }
    }

    void controlled_kernel(int cbit, int tbit, bool value, cplx u00, cplx u01, cplx u10, cplx u11) {
        const std::size_t bc = std::size_t{1} << cbit, bt = std::size_t{1} << tbit;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (static_cast<bool>(i & bc) != value || (i & bt)) continue;
            const cplx a0 = data_[i], a1 = data_[i | bt];
            data_[i] = u00 * a0 + u01 * a1;
            data_[i | bt] = u10 * a0 + u11 * a1;
        }
    }

    void quad_kernel(int fbit, int sbit, const std::array<cplx, 16>& m) {
        const std::size_t bf = std::size_t{1} << fbit, bs = std::size_t{1} << sbit;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (i & (bf | bs)) continue;
            const std::size_t idx[4] = {i, i | bs, i | bf, i | bf | bs};
            const cplx a[4] = {data_[idx[0]], data_[idx[1]], data_[idx[2]], data_[idx[3]]};
            for (int r = 0; r < 4; ++r)
                data_[idx[r]] = m[4 * r] * a[0] + m[4 * r + 1] * a[1] + m[4 * r + 2] * a[2] + m[4 * r + 3] * a[3];
        }
    }

    int n_ = 0;
    std::vector<cplx> data_;
};

// Collection of independent clusters of qubits, each held as a density
// matrix over its live qubits. Starts from a product of pure single-qubit
// states; two-qubit gates merge clusters and discarded qubits are traced out.
class ClusterState {
public:
    explicit ClusterState(std::span<const std::array<cplx, 2>> kets) : where_(kets.size()) {
        for (std::size_t q = 0; q < kets.size(); ++q) {
            clusters_.push_back({DensityMatrix::pure(kets[q]), {static_cast<int>(q)}});
            where_[q] = static_cast<int>(q);
        }
    }

    void apply_1q(int q, const Matrix& u) {
        auto& c = cluster_of(q);
        c.rho.apply_1q(local(c, q), u);
    }

    void apply_controlled_1q(int control, int target, const Matrix& u, bool control_value = true) {
        auto& c = join(control, target);
        c.rho.apply_controlled_1q(local(c, control), local(c, target), u, control_value);
    }

    void apply_2q(int first, int second, const Matrix& u) {
        auto& c = join(first, second);
        c.rho.apply_2q(local(c, first), local(c, second), u);
    }

    void apply(const GateApplication& g, std::span<const double> params) {
        std::vector<double> p;
        p.reserve(g.param_slots.size());
        for (int s : g.param_slots) p.push_back(params[static_cast<std::size_t>(s)]);
        switch (g.kind) {
            case GateKind::CX: apply_controlled_1q(g.qubits[0], g.qubits[1], mat::pauli_x()); break;
            case GateKind::CY: apply_controlled_1q(g.qubits[0], g.qubits[1], mat::pauli_y()); break;
            case GateKind::CZ: apply_controlled_1q(g.qubits[0], g.qubits[1], mat::pauli_z()); break;
            case GateKind::CRX: apply_controlled_1q(g.qubits[0], g.qubits[1], mat::rx(p[0])); break;
            case GateKind::CRY: apply_controlled_1q(g.qubits[0], g.qubits[1], mat::ry(p[0])); break;
            case GateKind::CRZ: apply_controlled_1q(g.qubits[0], g.qubits[1], mat::rz(p[0])); break;
            case GateKind::ECR: apply_2q(g.qubits[0], g.qubits[1], gate_matrix(g.kind, p)); break;
            default: apply_1q(g.qubits[0], gate_matrix(g.kind, p)); break;
        }
    }

    // The qubit is never used again.
    void discard(int q) {
        auto& c = cluster_of(q);
        if (c.qubits.size() == 1) {
            c.qubits.clear();
        } else {
            const int l = local(c, q);
            c.rho = c.rho.trace_out(l);
            c.qubits.erase(c.qubits.begin() + l);
        }
        where_[static_cast<std::size_t>(q)] = -1;
    }

    double prob1(int q) {
        auto& c = cluster_of(q);
        return c.rho.prob1(local(c, q));
    }

    int cluster_size(int q) { return static_cast<int>(cluster_of(q).qubits.size()); }

private:
    struct Cluster {
        DensityMatrix rho;
        std::vector<int> qubits;  // global ids, by local index
    };

    Cluster& cluster_of(int q) {
        if (q < 0 || static_cast<std::size_t>(q) >= where_.size() || where_[static_cast<std::size_t>(q)] < 0)
            throw std::out_of_range("ClusterState: qubit not live");
        return clusters_[static_cast<std::size_t>(where_[static_cast<std::size_t>(q)])];
    }

    static int local(const Cluster& c, int q) {
        return static_cast<int>(std::find(c.qubits.begin(), c.qubits.end(), q) - c.qubits.begin());
    }

    Cluster& join(int a, int b) {
        const int ia = where_[static_cast<std::size_t>(a)], ib = where_[static_cast<std::size_t>(b)];
        cluster_of(a);
        cluster_of(b);
        if (ia == ib) return clusters_[static_cast<std::size_t>(ia)];
        auto& ca = clusters_[static_cast<std::size_t>(ia)];
        auto& cb = clusters_[static_cast<std::size_t>(ib)];
        ca.rho = merge(ca.rho, cb.rho);
        for (int q : cb.qubits) {
            ca.qubits.push_back(q);
            where_[static_cast<std::size_t>(q)] = ia;
        }
        cb.qubits.clear();
        cb.rho = DensityMatrix{};
        return ca;
    }

    std::vector<Cluster> clusters_;
    std::vector<int> where_;
};

}  // namespace qforge
