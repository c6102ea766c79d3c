#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "state.hpp"

namespace qforge {

using Rng = std::mt19937_64;

// Independent generator for one (seed, stream, index) triple, so that work can
// be split across workers without changing results.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<double> uniform_vector(Rng& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

// Haar-random pure state from normalized complex Gaussian amplitudes.
inline StateVector haar_state(int num_qubits, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> amps(std::size_t{1} << num_qubits);
    double norm = 0.0;
    for (auto& a : amps) {
        a = cplx(g(rng), g(rng));
        norm += std::norm(a);
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& a : amps) a *= scale;
    return StateVector(num_qubits, std::move(amps));
}

}  // namespace qforge
