#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gates.hpp"
#include "image.hpp"

namespace qforge {

// 2x2 complex matrix without heap storage, row-major.
struct Mat2 {
    std::array<cplx, 4> m{1.0, 0.0, 0.0, 1.0};

    static Mat2 from(const Matrix& u) {
        if (u.dim() != 2) throw std::invalid_argument("Mat2: expected a 2x2 matrix");
        return {{u(0, 0), u(0, 1), u(1, 0), u(1, 1)}};
    }
    Matrix to_matrix() const { return Matrix(2, {m[0], m[1], m[2], m[3]}); }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {{a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
                 a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]}};
    }
};

namespace m2 {
inline Mat2 ry(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return {{c, -s, s, c}};
}
inline Mat2 rz(double t) { return {{std::polar(1.0, -t / 2), 0.0, 0.0, std::polar(1.0, t / 2)}}; }
inline Mat2 rx(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return {{c, cplx(0, -s), cplx(0, -s), c}};
}
inline Mat2 u3(double theta, double phi, double lambda) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return {{c, -std::polar(s, lambda), std::polar(s, phi), std::polar(c, phi + lambda)}};
}
inline Mat2 gate(GateKind k, const double* p) {
    switch (k) {
        case GateKind::RX: return rx(p[0]);
        case GateKind::RY: return ry(p[0]);
        case GateKind::RZ: return rz(p[0]);
        case GateKind::U3: return u3(p[0], p[1], p[2]);
        default: return Mat2::from(gate_matrix(k, std::span<const double>(p, static_cast<std::size_t>(gate_param_count(k)))));
    }
}
}  // namespace m2

enum class EncodingKind { QE, DQE, UE, WUE };

inline std::string to_string(EncodingKind k) {
    switch (k) {
        case EncodingKind::QE: return "QE";
        case EncodingKind::DQE: return "DQE";
        case EncodingKind::UE: return "UE";
        case EncodingKind::WUE: return "WUE";
    }
    return "?";
}

inline EncodingKind parse_encoding(const std::string& s) {
    for (auto k : {EncodingKind::QE, EncodingKind::DQE, EncodingKind::UE, EncodingKind::WUE})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown encoding: " + s);
}

// Input values consumed by one encoding gate.
constexpr int values_per_gate(EncodingKind k) {
    switch (k) {
        case EncodingKind::QE: return 1;
        case EncodingKind::DQE: return 2;
        default: return 3;
    }
}

inline void check_domain(std::span<const double> x) {
    for (double v : x)
        if (!(v >= 0.0 && v < pi)) throw std::domain_error("encoding input outside [0, pi)");
}

inline std::vector<Matrix> encode_qe(std::span<const double> x) {
    check_domain(x);
    std::vector<Matrix> out;
    for (double v : x) out.push_back(mat::ry(v));
    return out;
}

inline std::vector<Matrix> encode_dqe(std::span<const double> x) {
    check_domain(x);
    std::vector<Matrix> out;
    for (std::size_t j = 0; j < x.size(); j += 2) {
        const double second = j + 1 < x.size() ? x[j + 1] : 0.0;
        out.push_back(mat::rz(second) * mat::ry(x[j]));
    }
    return out;
}

inline std::vector<Matrix> encode_ue(std::span<const double> x) {
    check_domain(x);
    std::vector<Matrix> out;
    for (std::size_t j = 0; j < x.size(); j += 3) {
        const double b = j + 1 < x.size() ? x[j + 1] : 0.0;
        const double c = j + 2 < x.size() ? x[j + 2] : 0.0;
        out.push_back(mat::u3(x[j], b, c));
    }
    return out;
}

// `weights` holds either three values shared by every group or three per group.
inline std::vector<Matrix> encode_wue(std::span<const double> x, double theta, std::span<const double> weights) {
    check_domain(x);
    const std::size_t groups = (x.size() + 2) / 3;
    if (weights.size() != 3 && weights.size() != 3 * groups)
        throw std::invalid_argument("encode_wue: weights must have 3 or 3*groups entries");
    std::vector<Matrix> out;
    for (std::size_t g = 0; g < groups; ++g) {
        const double* w = weights.data() + (weights.size() == 3 ? 0 : 3 * g);
        double a[3];
        for (std::size_t i = 0; i < 3; ++i) {
            const std::size_t j = 3 * g + i;
            a[i] = theta + w[i] * (j < x.size() ? x[j] : 0.0);
        }
        out.push_back(mat::u3(a[0], a[1], a[2]));
    }
    return out;
}

struct CollapsedU3 {
    double theta = 0.0;
    double phi = 0.0;
    double lambda = 0.0;
    double global_phase = 0.0;

    Matrix to_matrix() const { return std::polar(1.0, global_phase) * mat::u3(theta, phi, lambda); }
    // U3 applied to |0>, global phase dropped.
    std::array<cplx, 2> ket() const { return {std::cos(theta / 2), std::polar(std::sin(theta / 2), phi)}; }
};

namespace detail {
inline double wrap_angle(double a) {
    a = std::remainder(a, 2 * pi);
    return a <= -pi ? a + 2 * pi : a;
}
}  // namespace detail

// Decompose a 2x2 unitary as e^{i g} U3(theta, phi, lambda).
inline CollapsedU3 collapse_u3(const Mat2& u) {
    const double a00 = std::abs(u.m[0]), a10 = std::abs(u.m[2]);
    CollapsedU3 r;
    r.theta = 2.0 * std::atan2(a10, a00);
    constexpr double tiny = 1e-14;
    if (a10 < tiny) {
        r.global_phase = std::arg(u.m[0]);
        r.phi = 0.0;
        r.lambda = std::arg(u.m[3]) - r.global_phase;
    } else if (a00 < tiny) {
        r.global_phase = std::arg(u.m[2]);
        r.phi = 0.0;
        r.lambda = std::arg(-u.m[1]) - r.global_phase;
    } else {
        r.global_phase = std::arg(u.m[0]);
        r.phi = std::arg(u.m[2]) - r.global_phase;
        r.lambda = std::arg(-u.m[1]) - r.global_phase;
    }
    r.global_phase = detail::wrap_angle(r.global_phase);
    r.phi = detail::wrap_angle(r.phi);
    r.lambda = detail::wrap_angle(r.lambda);
    return r;
}

// seq[0] is applied first, so the product is seq[n-1] * ... * seq[0].
inline CollapsedU3 collapse_u3(std::span<const Matrix> seq) {
    if (seq.empty()) throw std::invalid_argument("collapse_u3: empty sequence");
    Mat2 acc;
    for (const auto& g : seq) acc = Mat2::from(g) * acc;
    return collapse_u3(acc);
}

struct FragmentLayer {
    int kernel_rows = 2;
    int kernel_cols = 2;
    int stride_rows = 2;
    int stride_cols = 2;
    std::vector<GateKind> gate_template;  // trainable gates applied after every unit of the kernel
};

struct FragmentSpec {
    std::vector<FragmentLayer> layers;
    EncodingKind base = EncodingKind::QE;

    // Units in one kernel of layer l: encoding gates at the base layer, child fragments above it.
    int units(std::size_t l) const {
        const auto& L = layers[l];
        const int cells = L.kernel_rows * L.kernel_cols;
        if (l > 0) return cells;
        const int g = values_per_gate(base);
        return (cells + g - 1) / g;
    }

    int template_params(std::size_t l) const {
        int p = 0;
        for (auto k : layers[l].gate_template) p += gate_param_count(k);
        return p;
    }

    int encoding_params() const { return base == EncodingKind::WUE ? 4 : 0; }

    int layer_offset(std::size_t l) const {
        int off = encoding_params();
        for (std::size_t i = 0; i < l; ++i) off += units(i) * template_params(i);
        return off;
    }

    int num_params() const { return layer_offset(layers.size()); }

    std::pair<int, int> output_shape(int rows, int cols) const {
        if (layers.empty()) throw std::invalid_argument("FragmentSpec: no layers");
        for (const auto& L : layers) {
            if (L.gate_template.empty())
                throw std::invalid_argument("FragmentSpec: every encoded unit must be followed by a trainable gate");
            for (auto k : L.gate_template)
                if (gate_arity(k) != 1) throw std::invalid_argument("FragmentSpec: template gates must act on one qubit");
            if (L.kernel_rows < 1 || L.kernel_cols < 1 || L.stride_rows < 1 || L.stride_cols < 1)
                throw std::invalid_argument("FragmentSpec: kernel and stride must be positive");
            if (rows < L.kernel_rows || cols < L.kernel_cols || (rows - L.kernel_rows) % L.stride_rows != 0 ||
                (cols - L.kernel_cols) % L.stride_cols != 0)
                throw std::invalid_argument("FragmentSpec: image shape incompatible with the layer cascade");
            rows = (rows - L.kernel_rows) / L.stride_rows + 1;
            cols = (cols - L.kernel_cols) / L.stride_cols + 1;
        }
        return {rows, cols};
    }
};

// Per-output-qubit unitaries of the fragment encoding, row-major over the output grid.
// Inside a kernel the units are taken in raster order; unit j contributes
// T_j * E_j (its encoding, then its trainable gates), and unit 0 acts first.
inline std::vector<Mat2> fragment_unitaries(const Image& image, const FragmentSpec& spec, std::span<const double> weights) {
    spec.output_shape(image.rows, image.cols);
    if (static_cast<int>(weights.size()) != spec.num_params())
        throw std::invalid_argument("fragment_encode: weight count does not match the spec");
    for (double v : image.values)
        if (!(v >= 0.0 && v < pi)) throw std::domain_error("fragment_encode: pixel angle outside [0, pi)");

    auto trainable = [&](std::size_t l, int unit) {
        const auto& tmpl = spec.layers[l].gate_template;
        const double* p = weights.data() + spec.layer_offset(l) + unit * spec.template_params(l);
        Mat2 t;
        for (auto k : tmpl) {
            t = m2::gate(k, p) * t;
            p += gate_param_count(k);
        }
        return t;
    };

    std::vector<Mat2> cur;
    int rows = image.rows, cols = image.cols;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const auto& L = spec.layers[l];
        const int orows = (rows - L.kernel_rows) / L.stride_rows + 1;
        const int ocols = (cols - L.kernel_cols) / L.stride_cols + 1;
        const int nunits = spec.units(l);
        std::vector<Mat2> unit_gates(static_cast<std::size_t>(nunits));
        for (int u = 0; u < nunits; ++u) unit_gates[static_cast<std::size_t>(u)] = trainable(l, u);

        std::vector<Mat2> next(static_cast<std::size_t>(orows * ocols));
        std::vector<double> field(static_cast<std::size_t>(L.kernel_rows * L.kernel_cols));
        for (int i = 0; i < orows; ++i)
            for (int j = 0; j < ocols; ++j) {
                Mat2 acc;
                if (l == 0) {
                    std::size_t f = 0;
                    for (int a = 0; a < L.kernel_rows; ++a)
                        for (int b = 0; b < L.kernel_cols; ++b)
                            field[f++] = image(i * L.stride_rows + a, j * L.stride_cols + b);
                    const int g = values_per_gate(spec.base);
                    for (int u = 0; u < nunits; ++u) {
                        double v[3] = {0.0, 0.0, 0.0};
                        for (int t = 0; t < g; ++t) {
                            const std::size_t idx = static_cast<std::size_t>(u * g + t);
                            if (idx < field.size()) v[t] = field[idx];
                        }
                        Mat2 e;
                        switch (spec.base) {
                            case EncodingKind::QE: e = m2::ry(v[0]); break;
                            case EncodingKind::DQE: e = m2::rz(v[1]) * m2::ry(v[0]); break;
                            case EncodingKind::UE: e = m2::u3(v[0], v[1], v[2]); break;
                            case EncodingKind::WUE: {
                                const double th = weights[0];
                                e = m2::u3(th + weights[1] * v[0], th + weights[2] * v[1], th + weights[3] * v[2]);
                                break;
                            }
                        }
                        acc = unit_gates[static_cast<std::size_t>(u)] * e * acc;
                    }
                } else {
                    int u = 0;
                    for (int a = 0; a < L.kernel_rows; ++a)
                        for (int b = 0; b < L.kernel_cols; ++b, ++u) {
                            const Mat2& child =
                                cur[static_cast<std::size_t>((i * L.stride_rows + a) * cols + (j * L.stride_cols + b))];
                            acc = unit_gates[static_cast<std::size_t>(u)] * child * acc;
                        }
                }
                next[static_cast<std::size_t>(i * ocols + j)] = acc;
            }
        cur = std::move(next);
        rows = orows;
        cols = ocols;
    }
    return cur;
}

inline std::vector<CollapsedU3> fragment_encode(const Image& image, const FragmentSpec& spec, std::span<const double> weights) {
    const auto us = fragment_unitaries(image, spec, weights);
    std::vector<CollapsedU3> out;
    out.reserve(us.size());
    for (const auto& u : us) out.push_back(collapse_u3(u));
    return out;
}

inline nlohmann::json to_json(const FragmentSpec& s) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& L : s.layers) {
        std::vector<std::string> tmpl;
        for (auto k : L.gate_template) tmpl.emplace_back(gate_name(k));
        layers.push_back({{"kernel", {L.kernel_rows, L.kernel_cols}},
                          {"stride", {L.stride_rows, L.stride_cols}},
                          {"gate_template", tmpl}});
    }
    return {{"base_encoding", to_string(s.base)}, {"layers", layers}};
}

inline FragmentSpec fragment_spec_from_json(const nlohmann::json& j) {
    FragmentSpec s;
    s.base = parse_encoding(j.value("base_encoding", std::string("QE")));
    for (const auto& L : j.at("layers")) {
        FragmentLayer fl;
        const auto k = L.at("kernel").get<std::vector<int>>();
        const auto st = L.at("stride");
        fl.kernel_rows = k.at(0);
        fl.kernel_cols = k.at(1);
        if (st.is_number()) fl.stride_rows = fl.stride_cols = st.get<int>();
        else {
            fl.stride_rows = st.at(0).get<int>();
            fl.stride_cols = st.at(1).get<int>();
        }
        for (const auto& name : L.at("gate_template")) fl.gate_template.push_back(parse_gate_kind(name.get<std::string>()));
        s.layers.push_back(std::move(fl));
    }
    return s;
}

// Peak number of stored values when a fragment of an n x n input is pushed
// through alternating k x k convolutions and m x m poolings one receptive field
// at a time.
inline long long memory_bound(long long n, long long k, long long m) {
    if (k < 1 || m < 2 || n < 1) throw std::invalid_argument("memory_bound: need k >= 1, m >= 2, n >= 1");
    long long levels = 0, v = 1;
    while (v < n) {
        v *= m;
        ++levels;
    }
    if (v != n) throw std::invalid_argument("memory_bound: n must be a power of m");
    return 1 + (k * k + m * m - 2) * levels;
}

// Brute-force count of the same quantity: evaluates the final output of an
// n x n input through stride-1 k x k convolutions and m x m / stride-m
// poolings depth first. Maps wrap around at the borders, so every kernel
// input is a computed value (the worst case). Every loaded pixel is one live
// value; a node frees its inputs once it is computed.
inline long long memory_liveness_peak(long long n, long long k, long long m) {
    if (k < 1 || m < 2 || n < 1) throw std::invalid_argument("memory_liveness_peak: need k >= 1, m >= 2, n >= 1");
    int levels = 0;
    for (long long v = 1; v < n; v *= m) ++levels;
    {
        long long v = 1;
        for (int i = 0; i < levels; ++i) v *= m;
        if (v != n) throw std::invalid_argument("memory_liveness_peak: n must be a power of m");
    }
    long long live = 0, peak = 0;
    auto hold = [&](long long d) {
        live += d;
        peak = std::max(peak, live);
    };
    // size of the feature map at pooling level j is n / m^j
    std::function<void(int, long long, long long)> pool_out, conv_out;
    conv_out = [&](int level, long long r, long long c) {  // conv output of `level` at (r, c)
        const long long size = [&] {
            long long s = n;
            for (int i = 1; i < level; ++i) s /= m;
            return s;
        }();
        for (long long a = 0; a < k; ++a)
            for (long long b = 0; b < k; ++b) {
                const long long rr = (r + a) % size, cc = (c + b) % size;
                if (level == 1) hold(1);  // pixel
                else pool_out(level - 1, rr, cc);
            }
        hold(1 - k * k);
    };
    pool_out = [&](int level, long long r, long long c) {
        for (long long a = 0; a < m; ++a)
            for (long long b = 0; b < m; ++b) conv_out(level, r * m + a, c * m + b);
        hold(1 - m * m);
    };
    pool_out(levels, 0, 0);
    return peak;
}

}  // namespace qforge
