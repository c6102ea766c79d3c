#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"
#include "encodings.hpp"
#include "image.hpp"
#include "library.hpp"
#include "metrics.hpp"
#include "mixed.hpp"

namespace qforge {

// (X (x) I) CRX(t0) (X (x) I) CRZ(t1) with the control as the left factor:
// Rz(t1) on the target when the control is |1>, Rx(t0) when it is |0>.
inline Matrix pooling_unitary(double theta0, double theta1) {
    const Matrix x_c = kron(mat::pauli_x(), Matrix::identity(2));
    return x_c * mat::controlled(mat::rx(theta0)) * x_c * mat::controlled(mat::rz(theta1));
}

// Same operation as gates, in application order.
inline void add_pooling_gates(ParameterizedCircuit& c, int control, int target, int slot0, int slot1) {
    c.add(GateKind::CRZ, {control, target}, {slot1});
    c.add(GateKind::X, {control});
    c.add(GateKind::CRX, {control, target}, {slot0});
    c.add(GateKind::X, {control});
}

inline void apply_pooling(StateVector& s, int control, int target, double theta0, double theta1) {
    s.apply_controlled_1q(control, target, mat::rz(theta1), true);
    s.apply_controlled_1q(control, target, mat::rx(theta0), false);
}

// Pooling arrows (discarded, survivor) that shrink a rows x cols grid by one
// row and one column: corner first, then the last column leftward, then the
// last row upward. Cells are row-major positions.
inline std::vector<std::pair<int, int>> interpolation_arrows(int rows, int cols) {
    if (rows < 2 || cols < 2) throw std::invalid_argument("interpolation needs at least a 2x2 grid");
    std::vector<std::pair<int, int>> arrows;
    auto cell = [cols](int r, int c) { return r * cols + c; };
    arrows.emplace_back(cell(rows - 1, cols - 1), cell(rows - 1, cols - 2));
    for (int r = 0; r < rows - 1; ++r) arrows.emplace_back(cell(r, cols - 1), cell(r, cols - 2));
    for (int c = 0; c < cols - 1; ++c) arrows.emplace_back(cell(rows - 1, c), cell(rows - 2, c));
    return arrows;
}

// Arrows of a 2x2 / stride-2 pooling; survivors are the top-left cells.
inline std::vector<std::pair<int, int>> pooling_arrows(int rows, int cols) {
    if (rows % 2 || cols % 2) throw std::invalid_argument("2x2 pooling needs even grid dimensions");
    std::vector<std::pair<int, int>> arrows;
    for (int r = 0; r < rows; r += 2)
        for (int c = 0; c < cols; c += 2) {
            const int survivor = r * cols + c;
            arrows.emplace_back(r * cols + c + 1, survivor);
            arrows.emplace_back((r + 1) * cols + c, survivor);
            arrows.emplace_back((r + 1) * cols + c + 1, survivor);
        }
    return arrows;
}

inline StateVector apply_interpolation(StateVector state, int grid_rows, int grid_cols, std::span<const double> params) {
    if (grid_rows * grid_cols != state.num_qubits())
        throw std::invalid_argument("apply_interpolation: grid does not match the qubit count");
    if (params.size() != 2) throw std::invalid_argument("apply_interpolation: expects two angles");
    for (auto [from, to] : interpolation_arrows(grid_rows, grid_cols)) apply_pooling(state, from, to, params[0], params[1]);
    return state;
}

// ---------------------------------------------------------------- regular

struct RegularLayer {
    enum class Kind { Pool, Interpolate, Conv1x1, Conv };
    Kind kind = Kind::Pool;
    std::string circuit_name;        // for Conv: "C1".."C5", "AS" or "inline"
    ParameterizedCircuit circuit;    // for Conv

    int num_params() const {
        switch (kind) {
            case Kind::Pool: case Kind::Interpolate: return 2;
            case Kind::Conv1x1: return 3;
            case Kind::Conv: return circuit.num_params();
        }
        return 0;
    }
};

struct RegularModel {
    std::string name;
    int image_rows = 32;
    int image_cols = 32;
    FragmentSpec fragment;
    std::vector<RegularLayer> stack;

    std::pair<int, int> grid() const { return fragment.output_shape(image_rows, image_cols); }
    int num_qubits() const {
        const auto [r, c] = grid();
        return r * c;
    }
    int num_params() const {
        int p = fragment.num_params();
        for (const auto& l : stack) p += l.num_params();
        return p;
    }
};

namespace detail {

// Tracks which qubits remain active, as a row-major grid.
struct ActiveGrid {
    int rows, cols;
    std::vector<int> qubits;

    static ActiveGrid full(int r, int c) {
        ActiveGrid g{r, c, {}};
        for (int i = 0; i < r * c; ++i) g.qubits.push_back(i);
        return g;
    }

    template <class OnArrow>
    void pool(const std::vector<std::pair<int, int>>& arrows, int new_rows, int new_cols, OnArrow&& on_arrow) {
        std::vector<bool> dropped(qubits.size(), false);
        for (auto [from, to] : arrows) {
            on_arrow(qubits[static_cast<std::size_t>(from)], qubits[static_cast<std::size_t>(to)]);
            dropped[static_cast<std::size_t>(from)] = true;
        }
        std::vector<int> kept;
        for (std::size_t i = 0; i < qubits.size(); ++i)
            if (!dropped[i]) kept.push_back(qubits[i]);
        qubits = std::move(kept);
        rows = new_rows;
        cols = new_cols;
    }
};

// Walks the stack, emitting operations through the callbacks. Returns the readout qubit.
template <class OnPool, class OnU3, class OnConv>
int walk_stack(const RegularModel& m, OnPool&& on_pool, OnU3&& on_u3, OnConv&& on_conv) {
    const auto [r0, c0] = m.grid();
    ActiveGrid g = ActiveGrid::full(r0, c0);
    int offset = m.fragment.num_params();
    for (const auto& layer : m.stack) {
        switch (layer.kind) {
            case RegularLayer::Kind::Pool:
                g.pool(pooling_arrows(g.rows, g.cols), g.rows / 2, g.cols / 2,
                       [&](int from, int to) { on_pool(from, to, offset); });
                break;
            case RegularLayer::Kind::Interpolate:
                g.pool(interpolation_arrows(g.rows, g.cols), g.rows - 1, g.cols - 1,
                       [&](int from, int to) { on_pool(from, to, offset); });
                break;
            case RegularLayer::Kind::Conv1x1:
                for (int q : g.qubits) on_u3(q, offset);
                break;
            case RegularLayer::Kind::Conv: {
                const int k2 = layer.circuit.num_qubits();
                const int k = static_cast<int>(std::lround(std::sqrt(k2)));
                if (k * k != k2) throw std::invalid_argument("convolution circuit must act on a square number of qubits");
                if (g.rows % k || g.cols % k)
                    throw std::invalid_argument("convolution kernel does not tile the active grid");
                std::vector<int> last_of_block;
                for (int br = 0; br < g.rows; br += k)
                    for (int bc = 0; bc < g.cols; bc += k) {
                        std::vector<int> map;
                        for (int a = 0; a < k; ++a)
                            for (int b = 0; b < k; ++b)
                                map.push_back(g.qubits[static_cast<std::size_t>((br + a) * g.cols + bc + b)]);
                        on_conv(layer.circuit, map, offset);
                        last_of_block.push_back(map.back());
                    }
                // A kernel covering the whole grid funnels into its last qubit.
                if (last_of_block.size() == 1) g = ActiveGrid{1, 1, last_of_block};
                break;
            }
        }
        offset += layer.num_params();
    }
    if (g.qubits.empty()) throw std::logic_error("regular model: no active qubit left");
    return g.qubits.back();
}

}  // namespace detail

// Full stack as one circuit on all qubits; its parameter slots index the
// model's parameter vector minus the fragment part.
inline ParameterizedCircuit compile_stack(const RegularModel& m, int* readout = nullptr) {
    ParameterizedCircuit c(m.num_qubits());
    const int frag = m.fragment.num_params();
    const int q = detail::walk_stack(
        m, [&](int from, int to, int off) { add_pooling_gates(c, from, to, off - frag, off - frag + 1); },
        [&](int qubit, int off) { c.add(GateKind::U3, {qubit}, {off - frag, off - frag + 1, off - frag + 2}); },
        [&](const ParameterizedCircuit& conv, const std::vector<int>& map, int off) {
            for (const auto& g : conv.gates()) {
                GateApplication a = g;
                for (auto& qq : a.qubits) qq = map[static_cast<std::size_t>(qq)];
                for (auto& s : a.param_slots) s += off - frag;
                c.add(std::move(a));
            }
        });
    if (readout) *readout = q;
    return c;
}

inline int readout_qubit(const RegularModel& m) {
    return detail::walk_stack(m, [](int, int, int) {}, [](int, int) {}, [](const ParameterizedCircuit&, const std::vector<int>&, int) {});
}

// Product state prepared by the fragment encoding.
inline StateVector encoded_state(const RegularModel& m, const Image& image, std::span<const double> weights) {
    const auto frag = fragment_encode(image, m.fragment, weights.first(static_cast<std::size_t>(m.fragment.num_params())));
    std::vector<std::array<cplx, 2>> kets;
    kets.reserve(frag.size());
    for (const auto& u : frag) kets.push_back(u.ket());
    return StateVector::product(kets);
}

// Largest number of live qubits that end up sharing one cluster when pooled
// qubits are traced out as soon as they are discarded.
inline int max_cluster_qubits(const RegularModel& m) {
    const int n = m.num_qubits();
    std::vector<int> id(static_cast<std::size_t>(n)), live(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < n; ++i) id[static_cast<std::size_t>(i)] = i;
    int worst = 1;
    auto join = [&](int a, int b) {
        const int ia = id[static_cast<std::size_t>(a)], ib = id[static_cast<std::size_t>(b)];
        if (ia == ib) return;
        for (auto& v : id)
            if (v == ib) v = ia;
        live[static_cast<std::size_t>(ia)] += live[static_cast<std::size_t>(ib)];
        worst = std::max(worst, live[static_cast<std::size_t>(ia)]);
    };
    detail::walk_stack(
        m,
        [&](int from, int to, int) {
            join(from, to);
            --live[static_cast<std::size_t>(id[static_cast<std::size_t>(from)])];
        },
        [](int, int) {},
        [&](const ParameterizedCircuit& conv, const std::vector<int>& map, int) {
            for (const auto& g : conv.gates())
                if (g.qubits.size() == 2)
                    join(map[static_cast<std::size_t>(g.qubits[0])], map[static_cast<std::size_t>(g.qubits[1])]);
        });
    return worst;
}

// Reference path: one statevector over every qubit.
inline double regular_forward_statevector(const RegularModel& m, const Image& image, std::span<const double> weights) {
    StateVector s = encoded_state(m, image, weights);
    const int readout = detail::walk_stack(
        m,
        [&](int from, int to, int off) {
            apply_pooling(s, from, to, weights[static_cast<std::size_t>(off)], weights[static_cast<std::size_t>(off + 1)]);
        },
        [&](int qubit, int off) {
            const auto o = static_cast<std::size_t>(off);
            s.apply_1q(qubit, mat::u3(weights[o], weights[o + 1], weights[o + 2]));
        },
        [&](const ParameterizedCircuit& conv, const std::vector<int>& map, int off) {
            const auto p = weights.subspan(static_cast<std::size_t>(off), static_cast<std::size_t>(conv.num_params()));
            for (const auto& g : conv.gates()) {
                GateApplication a = g;
                for (auto& qq : a.qubits) qq = map[static_cast<std::size_t>(qq)];
                detail::apply_in_place(s, a, p);
            }
        });
    return last_qubit_prob1(s, readout);
}

// Same result, tracing pooled qubits out as they are discarded.
inline double regular_forward_clustered(const RegularModel& m, const Image& image, std::span<const double> weights) {
    const auto frag = fragment_encode(image, m.fragment, weights.first(static_cast<std::size_t>(m.fragment.num_params())));
    std::vector<std::array<cplx, 2>> kets;
    kets.reserve(frag.size());
    for (const auto& u : frag) kets.push_back(u.ket());
    ClusterState s(kets);
    const int readout = detail::walk_stack(
        m,
        [&](int from, int to, int off) {
            const auto o = static_cast<std::size_t>(off);
            s.apply_controlled_1q(from, to, mat::rz(weights[o + 1]), true);
            s.apply_controlled_1q(from, to, mat::rx(weights[o]), false);
            s.discard(from);
        },
        [&](int qubit, int off) {
            const auto o = static_cast<std::size_t>(off);
            s.apply_1q(qubit, mat::u3(weights[o], weights[o + 1], weights[o + 2]));
        },
        [&](const ParameterizedCircuit& conv, const std::vector<int>& map, int off) {
            const auto p = weights.subspan(static_cast<std::size_t>(off), static_cast<std::size_t>(conv.num_params()));
            for (const auto& g : conv.gates()) {
                GateApplication a = g;
                for (auto& qq : a.qubits) qq = map[static_cast<std::size_t>(qq)];
                s.apply(a, p);
            }
        });
    return s.prob1(readout);
}

// Probability of reading |1> on the readout qubit. Picks whichever exact
// simulation path is cheaper for the model's shape.
inline double regular_forward(const RegularModel& m, const Image& image, std::span<const double> weights) {
    if (static_cast<int>(weights.size()) != m.num_params())
        throw std::invalid_argument("regular_forward: weight count does not match the model");
    if (image.rows != m.image_rows || image.cols != m.image_cols)
        throw std::invalid_argument("regular_forward: image shape does not match the model");
    const int n = m.num_qubits();
    if (n >= 8 && 2 * max_cluster_qubits(m) < n) return regular_forward_clustered(m, image, weights);
    return regular_forward_statevector(m, image, weights);
}

// ---------------------------------------------------------------- hybrid

enum class HybridVariant { TypeI, TypeII };

struct HybridLayer {
    int kernel = 2;
    int stride = 2;
    ParameterizedCircuit conv;
    std::string circuit_name;
    std::optional<int> pooling;  // optional m x m pooling stage after the convolution
};

struct HybridModel {
    std::string name;
    HybridVariant variant = HybridVariant::TypeII;
    std::vector<HybridLayer> layers;

    int num_params() const {
        int p = 0;
        for (const auto& l : layers) p += l.conv.num_params() + (l.pooling ? 2 : 0);
        return p;
    }
};

// Measured probability to the next layer's input angle.
inline double probability_to_angle(double p) {
    return std::min(std::clamp(p, 0.0, 1.0) * pi, std::nextafter(pi, 0.0));
}

namespace detail {

inline double run_segment(const ParameterizedCircuit& c, std::span<const double> angles, std::span<const double> params) {
    StateVector s = qe_product_state(angles);
    run_in_place(s, c, params);
    return last_qubit_prob1(s, c.num_qubits() - 1);
}

inline void check_angles(const Image& img) {
    for (double v : img.values)
        if (!(v >= 0.0 && v < pi)) throw std::domain_error("hybrid_forward: input angle outside [0, pi)");
}

}  // namespace detail

inline Image hybrid_layer_forward(HybridVariant variant, const HybridLayer& L, const Image& in, std::span<const double> params) {
    const int k = L.kernel, s = L.stride;
    const int need = variant == HybridVariant::TypeI ? k : k * k;
    if (L.conv.num_qubits() != need)
        throw std::invalid_argument("hybrid layer: convolution circuit has the wrong qubit count for the variant");
    if (in.rows < k || in.cols < k || (in.rows - k) % s || (in.cols - k) % s)
        throw std::invalid_argument("hybrid layer: input shape incompatible with kernel and stride");
    const auto conv_params = params.first(static_cast<std::size_t>(L.conv.num_params()));
    const int orows = (in.rows - k) / s + 1, ocols = (in.cols - k) / s + 1;
    Image out(orows, ocols);
    std::vector<double> seg(static_cast<std::size_t>(need));
    std::vector<double> column(static_cast<std::size_t>(k));
    for (int i = 0; i < orows; ++i)
        for (int j = 0; j < ocols; ++j) {
            double p;
            if (variant == HybridVariant::TypeII) {
                std::size_t f = 0;
                for (int a = 0; a < k; ++a)
                    for (int b = 0; b < k; ++b) seg[f++] = in(i * s + a, j * s + b);
                p = detail::run_segment(L.conv, seg, conv_params);
            } else {
                for (int a = 0; a < k; ++a) {
                    for (int b = 0; b < k; ++b) seg[static_cast<std::size_t>(b)] = in(i * s + a, j * s + b);
                    column[static_cast<std::size_t>(a)] = detail::run_segment(L.conv, seg, conv_params);
                }
                // a single row leaves no column to combine
                if (k == 1) {
                    p = column[0];
                } else {
                    for (auto& v : column) v = probability_to_angle(v);
                    p = detail::run_segment(L.conv, column, conv_params);
                }
            }
            out(i, j) = p;
        }
    if (!L.pooling) return out;

    const int m = *L.pooling;
    if (m < 2 || out.rows % m || out.cols % m) throw std::invalid_argument("hybrid pooling: grid not divisible");
    const double t0 = params[static_cast<std::size_t>(L.conv.num_params())];
    const double t1 = params[static_cast<std::size_t>(L.conv.num_params() + 1)];
    Image pooled(out.rows / m, out.cols / m);
    std::vector<double> block(static_cast<std::size_t>(m * m));
    for (int i = 0; i < pooled.rows; ++i)
        for (int j = 0; j < pooled.cols; ++j) {
            std::size_t f = 0;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) block[f++] = probability_to_angle(out(i * m + a, j * m + b));
            StateVector st = qe_product_state(block);
            const int last = m * m - 1;
            for (int q = 0; q < last; ++q) apply_pooling(st, q, last, t0, t1);
            pooled(i, j) = last_qubit_prob1(st, last);
        }
    return pooled;
}

// Output probability of the network; `image` holds angles in [0, pi).
inline double hybrid_forward(const HybridModel& m, const Image& image, std::span<const double> params) {
    if (static_cast<int>(params.size()) != m.num_params())
        throw std::invalid_argument("hybrid_forward: parameter count does not match the model");
    if (m.layers.empty()) throw std::invalid_argument("hybrid_forward: model has no layers");
    detail::check_angles(image);
    Image cur = image;
    std::size_t off = 0;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const auto& L = m.layers[l];
        const std::size_t n = static_cast<std::size_t>(L.conv.num_params() + (L.pooling ? 2 : 0));
        Image probs = hybrid_layer_forward(m.variant, L, cur, params.subspan(off, n));
        off += n;
        if (l + 1 == m.layers.size()) {
            if (probs.rows != 1 || probs.cols != 1)
                throw std::invalid_argument("hybrid_forward: the last layer must reduce the map to a single value");
            return probs(0, 0);
        }
        for (auto& v : probs.values) v = probability_to_angle(v);
        cur = std::move(probs);
    }
    return 0.0;
}

// ---------------------------------------------------------------- grid menu

inline std::vector<std::vector<GateKind>> grid_pipelines(int num_qubits) {
    using G = GateKind;
    switch (num_qubits) {
        case 1: return {{G::RX, G::RY, G::RZ, G::RX, G::RY}, {G::RX, G::U3, G::RY, G::U3, G::RZ}, {G::U3, G::U3, G::U3, G::U3, G::U3}};
        case 4: return {{G::RX, G::RY, G::RZ, G::RX}, {G::RX, G::U3, G::RY, G::U3}, {G::U3, G::U3, G::U3, G::U3}};
        case 16: return {{G::RX, G::RY, G::RZ}, {G::RX, G::U3, G::RY}, {G::U3, G::U3, G::U3}};
        default: throw std::invalid_argument("grid search covers 1, 4 and 16 qubits");
    }
}

inline std::string pipeline_name(const std::vector<GateKind>& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += "-";
        s += p[i] == GateKind::U3 ? "U3" : std::string(1, 'R') + static_cast<char>(std::tolower(gate_name(p[i])[1]));
    }
    return s;
}

inline FragmentSpec pipeline_fragment(const std::vector<GateKind>& p) {
    FragmentSpec f;
    f.base = EncodingKind::QE;
    for (auto k : p) f.layers.push_back(FragmentLayer{2, 2, 2, 2, {k}});
    return f;
}

inline RegularLayer conv_layer(const std::string& circuit_name, int num_qubits) {
    RegularLayer l;
    l.kind = RegularLayer::Kind::Conv;
    l.circuit_name = circuit_name;
    l.circuit = named_circuit(circuit_name, num_qubits, Architecture::Regular);
    return l;
}

inline RegularLayer simple_layer(RegularLayer::Kind k) {
    RegularLayer l;
    l.kind = k;
    return l;
}

inline std::string stack_name(const std::vector<RegularLayer>& stack) {
    std::string s;
    for (std::size_t i = 0; i < stack.size(); ++i) {
        if (i) s += "-";
        switch (stack[i].kind) {
            case RegularLayer::Kind::Pool: s += "Pool"; break;
            case RegularLayer::Kind::Interpolate: s += "Interpol"; break;
            case RegularLayer::Kind::Conv1x1: s += "U3"; break;
            case RegularLayer::Kind::Conv: s += stack[i].circuit_name; break;
        }
    }
    return s;
}

inline std::vector<std::vector<RegularLayer>> grid_stacks(int num_qubits) {
    using K = RegularLayer::Kind;
    const std::vector<std::string> convs = {"C1", "C2", "C3", "C4", "C5", "AS"};
    std::vector<std::vector<RegularLayer>> out;
    switch (num_qubits) {
        case 1:
            out.push_back({simple_layer(K::Conv1x1)});
            break;
        case 4:
            for (const auto& c : convs) out.push_back({conv_layer(c, 4)});
            out.push_back({simple_layer(K::Pool), simple_layer(K::Conv1x1)});
            break;
        case 16:
            for (const auto& c : convs) out.push_back({simple_layer(K::Pool), conv_layer(c, 4)});
            for (const auto& c : convs) out.push_back({simple_layer(K::Interpolate), conv_layer(c, 9)});
            out.push_back({simple_layer(K::Pool), simple_layer(K::Conv1x1), simple_layer(K::Pool), simple_layer(K::Conv1x1)});
            break;
        default:
            throw std::invalid_argument("grid search covers 1, 4 and 16 qubits");
    }
    return out;
}

inline std::vector<RegularModel> grid_search_menu(int num_qubits) {
    std::vector<RegularModel> out;
    for (const auto& p : grid_pipelines(num_qubits))
        for (const auto& st : grid_stacks(num_qubits)) {
            RegularModel m;
            m.fragment = pipeline_fragment(p);
            m.stack = st;
            m.name = pipeline_name(p) + "->" + stack_name(st);
            out.push_back(std::move(m));
        }
    return out;
}

inline RegularModel find_grid_model(const std::string& name) {
    for (int q : {1, 4, 16})
        for (auto& m : grid_search_menu(q))
            if (m.name == name) return m;
    throw std::invalid_argument("no grid model named " + name);
}

// ---------------------------------------------------------------- serialization

inline nlohmann::json to_json(const RegularModel& m) {
    nlohmann::json stack = nlohmann::json::array();
    for (const auto& l : m.stack) {
        switch (l.kind) {
            case RegularLayer::Kind::Pool: stack.push_back({{"layer", "pool"}}); break;
            case RegularLayer::Kind::Interpolate: stack.push_back({{"layer", "interpolate"}}); break;
            case RegularLayer::Kind::Conv1x1: stack.push_back({{"layer", "conv1x1"}}); break;
            case RegularLayer::Kind::Conv:
                if (l.circuit_name == "inline" || l.circuit_name.empty())
                    stack.push_back({{"layer", "conv"}, {"circuit", to_json(l.circuit)}});
                else
                    stack.push_back({{"layer", "conv"}, {"circuit", l.circuit_name}, {"qubits", l.circuit.num_qubits()}});
                break;
        }
    }
    return {{"type", "regular"}, {"name", m.name}, {"image", {m.image_rows, m.image_cols}},
            {"fragment", to_json(m.fragment)}, {"stack", stack}};
}

inline RegularModel regular_model_from_json(const nlohmann::json& j) {
    RegularModel m;
    m.name = j.value("name", std::string{});
    if (j.contains("image")) {
        m.image_rows = j.at("image").at(0).get<int>();
        m.image_cols = j.at("image").at(1).get<int>();
    }
    m.fragment = fragment_spec_from_json(j.at("fragment"));
    for (const auto& l : j.at("stack")) {
        const auto kind = l.at("layer").get<std::string>();
        if (kind == "pool") m.stack.push_back(simple_layer(RegularLayer::Kind::Pool));
        else if (kind == "interpolate") m.stack.push_back(simple_layer(RegularLayer::Kind::Interpolate));
        else if (kind == "conv1x1") m.stack.push_back(simple_layer(RegularLayer::Kind::Conv1x1));
        else if (kind == "conv") {
            if (l.at("circuit").is_string()) m.stack.push_back(conv_layer(l.at("circuit").get<std::string>(), l.at("qubits").get<int>()));
            else {
                RegularLayer rl;
                rl.kind = RegularLayer::Kind::Conv;
                rl.circuit_name = "inline";
                rl.circuit = circuit_from_json(l.at("circuit"));
                m.stack.push_back(std::move(rl));
            }
        } else throw std::invalid_argument("unknown regular layer: " + kind);
    }
    m.num_qubits();
    return m;
}

inline nlohmann::json to_json(const HybridModel& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : m.layers) {
        nlohmann::json jl = {{"kernel", l.kernel}, {"stride", l.stride}};
        if (l.circuit_name.empty() || l.circuit_name == "inline") jl["circuit"] = to_json(l.conv);
        else {
            jl["circuit"] = l.circuit_name;
            jl["qubits"] = l.conv.num_qubits();
        }
        if (l.pooling) jl["pooling"] = *l.pooling;
        layers.push_back(jl);
    }
    return {{"type", "hybrid"}, {"name", m.name}, {"variant", m.variant == HybridVariant::TypeI ? "TypeI" : "TypeII"}, {"layers", layers}};
}

inline HybridModel hybrid_model_from_json(const nlohmann::json& j) {
    HybridModel m;
    m.name = j.value("name", std::string{});
    m.variant = j.value("variant", std::string("TypeII")) == "TypeI" ? HybridVariant::TypeI : HybridVariant::TypeII;
    for (const auto& l : j.at("layers")) {
        HybridLayer hl;
        hl.kernel = l.at("kernel").get<int>();
        hl.stride = l.value("stride", hl.kernel);
        if (l.at("circuit").is_string()) {
            hl.circuit_name = l.at("circuit").get<std::string>();
            hl.conv = named_circuit(hl.circuit_name, l.at("qubits").get<int>(), Architecture::Hybrid);
        } else {
            hl.circuit_name = "inline";
            hl.conv = circuit_from_json(l.at("circuit"));
        }
        if (l.contains("pooling")) hl.pooling = l.at("pooling").get<int>();
        m.layers.push_back(std::move(hl));
    }
    return m;
}

// Stack of 2x2 / stride-2 hybrid layers reducing a size x size map to one value.
inline HybridModel hybrid_pyramid(HybridVariant v, const std::string& circuit_name, int size = 32) {
    HybridModel m;
    m.variant = v;
    const int q = v == HybridVariant::TypeI ? 2 : 4;
    m.name = std::string(v == HybridVariant::TypeI ? "typeI-" : "typeII-") + circuit_name;
    for (int s = size; s > 1; s /= 2) {
        if (s % 2) throw std::invalid_argument("hybrid_pyramid: size must be a power of two");
        HybridLayer l;
        l.kernel = 2;
        l.stride = 2;
        l.circuit_name = circuit_name;
        l.conv = named_circuit(circuit_name, q, Architecture::Hybrid);
        m.layers.push_back(std::move(l));
    }
    return m;
}

}  // namespace qforge
