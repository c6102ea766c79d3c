#include <gtest/gtest.h>

#include <qforge/circuit.hpp>
#include <qforge/encodings.hpp>
#include <qforge/random.hpp>

#include "test_util.hpp"

using namespace qforge;
using namespace qforge::testing_util;

namespace {

Matrix product(const std::vector<Matrix>& seq) {  // seq[0] acts first
    Matrix acc = Matrix::identity(2);
    for (const auto& g : seq) acc = g * acc;
    return acc;
}

Matrix random_1q(Rng& rng) {
    static constexpr GateKind kinds[] = {GateKind::H, GateKind::SX, GateKind::X, GateKind::Y, GateKind::Z,
                                         GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::U3};
    const GateKind k = kinds[std::uniform_int_distribution<int>(0, 8)(rng)];
    return gate_matrix(k, random_params(gate_param_count(k), rng));
}

Image random_image(int rows, int cols, Rng& rng) {
    return Image(rows, cols, uniform_vector(rng, static_cast<std::size_t>(rows * cols), 0.0, pi - 1e-6));
}

StateVector product_state(const std::vector<Matrix>& per_qubit) {
    std::vector<std::array<cplx, 2>> kets;
    for (const auto& u : per_qubit) kets.push_back({u(0, 0), u(1, 0)});
    return StateVector::product(kets);
}

}  // namespace

TEST(EncodeQe, Examples) {
    EXPECT_LT(encode_qe(std::vector<double>{0.0})[0].max_abs_diff(Matrix::identity(2)), 1e-15);
    const auto half = encode_qe(std::vector<double>{pi / 2});
    EXPECT_NEAR(std::norm(half[0](1, 0)), 0.5, 1e-15);
    const auto two = encode_qe(std::vector<double>{0.3, 0.7});
    EXPECT_LT(two[0].max_abs_diff(mat::ry(0.3)), 1e-15);
    EXPECT_LT(two[1].max_abs_diff(mat::ry(0.7)), 1e-15);
}

TEST(EncodeQe, OutOfDomainThrows) {
    EXPECT_THROW(encode_qe(std::vector<double>{pi}), std::domain_error);
    EXPECT_THROW(encode_qe(std::vector<double>{-0.1}), std::domain_error);
}

TEST(EncodeQe, DistinctInputsGiveDistinctStates) {
    Rng rng = make_rng(1);
    for (int t = 0; t < 100; ++t) {
        const double a = uniform(rng, 1e-3, pi - 1e-3), b = uniform(rng, 1e-3, pi - 1e-3);
        if (std::abs(a - b) < 1e-6) continue;
        const StateVector sa = product_state(encode_qe(std::vector<double>{a}));
        const StateVector sb = product_state(encode_qe(std::vector<double>{b}));
        ASSERT_LT(fidelity(sa, sb), 1.0);
    }
}

TEST(EncodeDqe, Examples) {
    const double a = 0.9;
    const auto one = encode_dqe(std::vector<double>{a, 0.0});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_LT(one[0].max_abs_diff(mat::ry(a)), 1e-15);
    const auto odd = encode_dqe(std::vector<double>{pi / 2});
    EXPECT_LT(odd[0].max_abs_diff(mat::ry(pi / 2)), 1e-15);
    const auto three = encode_dqe(std::vector<double>{0.2, 0.4, 0.6});
    ASSERT_EQ(three.size(), 2u);
    EXPECT_LT(three[0].max_abs_diff(mat::rz(0.4) * mat::ry(0.2)), 1e-15);
    EXPECT_LT(three[1].max_abs_diff(mat::ry(0.6)), 1e-15);
}

TEST(EncodeUe, Examples) {
    EXPECT_LT(encode_ue(std::vector<double>{0, 0, 0})[0].max_abs_diff(Matrix::identity(2)), 1e-15);
    EXPECT_LT(encode_ue(std::vector<double>{0.1, 0.2})[0].max_abs_diff(mat::u3(0.1, 0.2, 0.0)), 1e-15);
    EXPECT_THROW(encode_ue(std::vector<double>{3.5}), std::domain_error);
}

TEST(EncodeWue, ZeroWeightsIgnoreInput) {
    const double theta = 0.37;
    const std::vector<double> w(6, 0.0);
    const auto out = encode_wue(std::vector<double>{0.1, 0.5, 2.0, 1.0, 3.0}, theta, w);
    ASSERT_EQ(out.size(), 2u);
    for (const auto& u : out) EXPECT_LT(u.max_abs_diff(mat::u3(theta, theta, theta)), 1e-15);
}

TEST(EncodeWue, WeightShapeMismatchThrows) {
    EXPECT_THROW(encode_wue(std::vector<double>{0.1, 0.2, 0.3, 0.4}, 0.0, std::vector<double>(4, 1.0)),
                 std::invalid_argument);
}

TEST(Collapse, RyAdditivity) {
    const double a = 0.4, b = 1.3;
    const auto c = collapse_u3(std::vector<Matrix>{mat::ry(a), mat::ry(b)});
    EXPECT_NEAR(c.theta, a + b, 1e-12);
    EXPECT_NEAR(c.phi, 0.0, 1e-12);
    EXPECT_NEAR(c.lambda, 0.0, 1e-12);
    EXPECT_NEAR(c.global_phase, 0.0, 1e-12);
}

TEST(Collapse, IdentityGivesZeros) {
    const auto c = collapse_u3(std::vector<Matrix>{Matrix::identity(2)});
    EXPECT_NEAR(c.theta, 0.0, 1e-15);
    EXPECT_NEAR(c.phi, 0.0, 1e-15);
    EXPECT_NEAR(c.lambda, 0.0, 1e-15);
    EXPECT_NEAR(c.global_phase, 0.0, 1e-15);
}

TEST(Collapse, EmptyThrows) { EXPECT_THROW(collapse_u3(std::vector<Matrix>{}), std::invalid_argument); }

TEST(Collapse, FiveHundredRandomSequencesReconstruct) {
    Rng rng = make_rng(2);
    for (int t = 0; t < 500; ++t) {
        const int len = 1 + t % 20;
        std::vector<Matrix> seq;
        for (int i = 0; i < len; ++i) seq.push_back(random_1q(rng));
        const auto c = collapse_u3(seq);
        ASSERT_LT(c.to_matrix().max_abs_diff(product(seq)), 1e-10) << "sequence " << t;
    }
}

TEST(Collapse, DiagonalAndAntiDiagonalEdgeCases) {
    for (const auto& u : {mat::rz(0.8), gate_matrix(GateKind::X, {}), gate_matrix(GateKind::Y, {}),
                          gate_matrix(GateKind::Z, {}), mat::rx(pi)}) {
        EXPECT_LT(collapse_u3(std::vector<Matrix>{u}).to_matrix().max_abs_diff(u), 1e-12);
    }
}

TEST(Fragment, ZeroWeightsQeSumsAngles) {
    FragmentSpec spec{{FragmentLayer{2, 2, 2, 2, {GateKind::U3}}}, EncodingKind::QE};
    const Image img(2, 2, std::vector<double>{0.1, 0.2, 0.3, 0.4});
    const std::vector<double> w(static_cast<std::size_t>(spec.num_params()), 0.0);
    const auto out = fragment_encode(img, spec, w);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_LT(out[0].to_matrix().max_abs_diff(mat::ry(1.0)), 1e-12);
}

TEST(Fragment, DqeTwoUnitPattern) {
    FragmentSpec spec{{FragmentLayer{2, 2, 2, 2, {GateKind::U3}}}, EncodingKind::DQE};
    ASSERT_EQ(spec.units(0), 2);
    Rng rng = make_rng(3);
    const Image img = random_image(2, 2, rng);
    const auto w = random_params(spec.num_params(), rng);
    const Matrix u0 = mat::u3(w[0], w[1], w[2]), u1 = mat::u3(w[3], w[4], w[5]);
    const Matrix expected = u1 * mat::rz(img(1, 1)) * mat::ry(img(1, 0)) * u0 * mat::rz(img(0, 1)) * mat::ry(img(0, 0));
    EXPECT_LT(collapse_u3(fragment_unitaries(img, spec, w)[0]).to_matrix().max_abs_diff(expected), 1e-12);
}

TEST(Fragment, TwoLayerSixteenFactorOrdering) {
    const FragmentLayer L{2, 2, 2, 2, {GateKind::U3}};
    FragmentSpec spec{{L, L}, EncodingKind::QE};
    Rng rng = make_rng(4);
    const Image img = random_image(4, 4, rng);
    const auto w = random_params(spec.num_params(), rng);
    ASSERT_EQ(spec.num_params(), 24);
    auto u = [&](int layer, int pos) {
        const std::size_t o = static_cast<std::size_t>(12 * layer + 3 * pos);
        return mat::u3(w[o], w[o + 1], w[o + 2]);
    };
    // outer kernel in raster order, each child block in raster order inside it
    std::vector<Matrix> seq;
    for (int br = 0; br < 2; ++br)
        for (int bc = 0; bc < 2; ++bc) {
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    seq.push_back(mat::ry(img(2 * br + a, 2 * bc + b)));
                    seq.push_back(u(0, 2 * a + b));
                }
            seq.push_back(u(1, 2 * br + bc));
        }
    ASSERT_EQ(seq.size(), 36u);  // 16 encodings, 16 first-layer trainables, 4 outer trainables
    const auto out = fragment_encode(img, spec, w);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_LT(out[0].to_matrix().max_abs_diff(product(seq)), 1e-10);
}

TEST(Fragment, CollapsedMatchesUncollapsedPreparation) {
    Rng rng = make_rng(5);
    for (auto base : {EncodingKind::QE, EncodingKind::DQE, EncodingKind::UE, EncodingKind::WUE}) {
        FragmentSpec spec{{FragmentLayer{2, 2, 2, 2, {GateKind::RX, GateKind::RY}}, FragmentLayer{2, 2, 2, 2, {GateKind::U3}}},
                          base};
        const Image img = random_image(8, 8, rng);
        const auto w = random_params(spec.num_params(), rng);
        const auto raw = fragment_unitaries(img, spec, w);
        const auto col = fragment_encode(img, spec, w);
        ASSERT_EQ(raw.size(), 4u);
        std::vector<Matrix> a, b;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            a.push_back(raw[i].to_matrix());
            b.push_back(mat::u3(col[i].theta, col[i].phi, col[i].lambda));
        }
        EXPECT_GT(fidelity(product_state(a), product_state(b)), 1 - 1e-12);
    }
}

TEST(Fragment, ShapeAndWeightErrors) {
    FragmentSpec spec{{FragmentLayer{2, 2, 2, 2, {GateKind::U3}}}, EncodingKind::QE};
    EXPECT_THROW(fragment_encode(Image(3, 3), spec, std::vector<double>(3, 0.0)), std::invalid_argument);
    EXPECT_THROW(fragment_encode(Image(2, 2), spec, std::vector<double>(2, 0.0)), std::invalid_argument);
    FragmentSpec no_train{{FragmentLayer{2, 2, 2, 2, {}}}, EncodingKind::QE};
    EXPECT_THROW(fragment_encode(Image(2, 2), no_train, std::vector<double>{}), std::invalid_argument);
}

TEST(Fragment, JsonRoundTrip) {
    FragmentSpec spec{{FragmentLayer{2, 2, 2, 2, {GateKind::RX, GateKind::RY}}, FragmentLayer{4, 4, 4, 4, {GateKind::U3}}},
                      EncodingKind::DQE};
    const auto back = fragment_spec_from_json(nlohmann::json::parse(to_json(spec).dump()));
    EXPECT_EQ(to_json(back), to_json(spec));
}

TEST(MemoryBound, Examples) {
    EXPECT_EQ(memory_bound(2, 2, 2), 1 + (4 + 4 - 2));
    EXPECT_EQ(memory_bound(8, 2, 2), 19);
    EXPECT_EQ(memory_bound(16, 3, 2), 45);
    EXPECT_THROW(memory_bound(6, 2, 2), std::invalid_argument);
}

TEST(MemoryBound, FormulaEqualsLivenessOracle) {
    for (long long n : {4, 8, 16})
        for (long long k : {2, 3}) EXPECT_EQ(memory_bound(n, k, 2), memory_liveness_peak(n, k, 2)) << n << " " << k;
    EXPECT_EQ(memory_bound(9, 2, 3), memory_liveness_peak(9, 2, 3));
}
