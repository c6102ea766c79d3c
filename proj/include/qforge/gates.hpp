#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qforge {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// Small dense complex matrix, row-major. Used for gate matrices and as the
// reference representation in tests.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}
    Matrix(std::size_t dim, std::initializer_list<cplx> values) : dim_(dim), data_(values) {
        if (data_.size() != dim * dim) throw std::invalid_argument("Matrix: wrong element count");
    }

    static Matrix identity(std::size_t dim) {
        Matrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t dim() const { return dim_; }
    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }
    const std::vector<cplx>& data() const { return data_; }

    Matrix adjoint() const {
        Matrix out(dim_);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.dim_ != b.dim_) throw std::invalid_argument("Matrix: dimension mismatch");
        Matrix out(a.dim_);
        for (std::size_t r = 0; r < a.dim_; ++r)
            for (std::size_t k = 0; k < a.dim_; ++k) {
                const cplx v = a(r, k);
                if (v == cplx{}) continue;
                for (std::size_t c = 0; c < a.dim_; ++c) out(r, c) += v * b(k, c);
            }
        return out;
    }

    friend Matrix operator*(cplx s, Matrix m) {
        for (auto& v : m.data_) v *= s;
        return m;
    }

    // Kronecker product, `a` is the more significant factor.
    friend Matrix kron(const Matrix& a, const Matrix& b) {
        Matrix out(a.dim_ * b.dim_);
        for (std::size_t i = 0; i < a.dim_; ++i)
            for (std::size_t j = 0; j < a.dim_; ++j)
                for (std::size_t k = 0; k < b.dim_; ++k)
                    for (std::size_t l = 0; l < b.dim_; ++l)
                        out(i * b.dim_ + k, j * b.dim_ + l) = a(i, j) * b(k, l);
        return out;
    }

    double max_abs_diff(const Matrix& other) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i)
            worst = std::max(worst, std::abs(data_[i] - other.data_[i]));
        return worst;
    }

private:
    std::size_t dim_ = 0;
    std::vector<cplx> data_;
};

enum class GateKind { H, SX, X, Y, Z, RX, RY, RZ, U3, CX, CY, CZ, ECR, CRX, CRY, CRZ };

inline constexpr std::array<GateKind, 16> all_gate_kinds = {
    GateKind::H,  GateKind::SX, GateKind::X,  GateKind::Y,   GateKind::Z,   GateKind::RX,
    GateKind::RY, GateKind::RZ, GateKind::U3, GateKind::CX,  GateKind::CY,  GateKind::CZ,
    GateKind::ECR, GateKind::CRX, GateKind::CRY, GateKind::CRZ};

constexpr int gate_arity(GateKind k) {
    switch (k) {
        case GateKind::CX: case GateKind::CY: case GateKind::CZ: case GateKind::ECR:
        case GateKind::CRX: case GateKind::CRY: case GateKind::CRZ:
            return 2;
        default:
            return 1;
    }
}

constexpr int gate_param_count(GateKind k) {
    switch (k) {
        case GateKind::RX: case GateKind::RY: case GateKind::RZ:
        case GateKind::CRX: case GateKind::CRY: case GateKind::CRZ:
            return 1;
        case GateKind::U3:
            return 3;
        default:
            return 0;
    }
}

constexpr std::string_view gate_name(GateKind k) {
    switch (k) {
        case GateKind::H: return "H";
        case GateKind::SX: return "SX";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::U3: return "U3";
        case GateKind::CX: return "CX";
        case GateKind::CY: return "CY";
        case GateKind::CZ: return "CZ";
        case GateKind::ECR: return "ECR";
        case GateKind::CRX: return "CRX";
        case GateKind::CRY: return "CRY";
        case GateKind::CRZ: return "CRZ";
    }
    return "?";
}

inline GateKind parse_gate_kind(std::string_view name) {
    std::string upper(name);
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    for (GateKind k : all_gate_kinds)
        if (gate_name(k) == upper) return k;
    if (upper == "CNOT") return GateKind::CX;
    throw std::invalid_argument("unknown gate kind: " + std::string(name));
}

namespace mat {

inline Matrix rx(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return Matrix(2, {c, cplx(0, -s), cplx(0, -s), c});
}
inline Matrix ry(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return Matrix(2, {c, -s, s, c});
}
inline Matrix rz(double t) {
    return Matrix(2, {std::polar(1.0, -t / 2), 0.0, 0.0, std::polar(1.0, t / 2)});
}
inline Matrix u3(double theta, double phi, double lambda) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return Matrix(2, {c, -std::polar(s, lambda), std::polar(s, phi), std::polar(c, phi + lambda)});
}
inline Matrix pauli_x() { return Matrix(2, {0.0, 1.0, 1.0, 0.0}); }
inline Matrix pauli_y() { return Matrix(2, {0.0, cplx(0, -1), cplx(0, 1), 0.0}); }
inline Matrix pauli_z() { return Matrix(2, {1.0, 0.0, 0.0, -1.0}); }

// |0><0| (x) I + |1><1| (x) target, control is the more significant factor.
inline Matrix controlled(const Matrix& target) {
    Matrix out = Matrix::identity(4);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) out(2 + r, 2 + c) = target(r, c);
    return out;
}

}  // namespace mat

// Local matrix of a gate. For two-qubit gates the basis index is
// 2*bit(first operand) + bit(second operand); the first operand is the control.
inline Matrix gate_matrix(GateKind k, std::span<const double> params) {
    if (params.size() != static_cast<std::size_t>(gate_param_count(k)))
        throw std::invalid_argument("gate_matrix: wrong parameter count for " + std::string(gate_name(k)));
    const double r = 1.0 / std::sqrt(2.0);
    switch (k) {
        case GateKind::H: return Matrix(2, {r, r, r, -r});
        case GateKind::SX:
            return Matrix(2, {cplx(0.5, 0.5), cplx(0.5, -0.5), cplx(0.5, -0.5), cplx(0.5, 0.5)});
        case GateKind::X: return mat::pauli_x();
        case GateKind::Y: return mat::pauli_y();
        case GateKind::Z: return mat::pauli_z();
        case GateKind::RX: return mat::rx(params[0]);
        case GateKind::RY: return mat::ry(params[0]);
        case GateKind::RZ: return mat::rz(params[0]);
        case GateKind::U3: return mat::u3(params[0], params[1], params[2]);
        case GateKind::CX: return mat::controlled(mat::pauli_x());
        case GateKind::CY: return mat::controlled(mat::pauli_y());
        case GateKind::CZ: return mat::controlled(mat::pauli_z());
        case GateKind::CRX: return mat::controlled(mat::rx(params[0]));
        case GateKind::CRY: return mat::controlled(mat::ry(params[0]));
        case GateKind::CRZ: return mat::controlled(mat::rz(params[0]));
        case GateKind::ECR: {
            // (X (x) I - Y (x) X) / sqrt(2), first operand as the left factor
            Matrix a = kron(mat::pauli_x(), Matrix::identity(2));
            Matrix b = kron(mat::pauli_y(), mat::pauli_x());
            Matrix out(4);
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = 0; j < 4; ++j) out(i, j) = r * (a(i, j) - b(i, j));
            return out;
        }
    }
    throw std::invalid_argument("gate_matrix: unhandled kind");
}

inline Matrix gate_matrix(GateKind k, std::initializer_list<double> params) {
    return gate_matrix(k, std::span<const double>(params.begin(), params.size()));
}

}  // namespace qforge
