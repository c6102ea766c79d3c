#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "library.hpp"
#include "metrics.hpp"

namespace qforge {

// Published circuit statistics used as reproduction targets.
struct ReferenceRow {
    std::string id;  // "C1".."C6" or "AS"
    Complexity complexity;
    double expr, expr_std;
    double entgl, entgl_std;
    double l_pqc;
};

struct ReferenceTable {
    std::string name;  // s1..s8
    Architecture arch;
    int num_qubits;
    double expr_thr;
    double entgl_thr;
    std::vector<ReferenceRow> rows;
};

inline const std::vector<ReferenceTable>& reference_tables() {
    static const std::vector<ReferenceTable> tables = {
        {"s1", Architecture::Hybrid, 2, 0.016, 0.4,
         {{"C1", {2, 3, 5}, 0.252, 0.31, 0.203, 0.258, 1.664},
          {"C2", {3, 3, 4}, 0.005, 0.001, 0.249, 0.003, 1.376},
          {"C3", {4, 3, 5}, 0.331, 0.325, 0.501, 0.14, 1.23},
          {"C4", {4, 3, 5}, 0.005, 0.001, 0.25, 0.002, 1.375},
          {"C5", {4, 4, 6}, 0.002, 0.001, 0.313, 0.002, 1.218},
          {"C6", {6, 4, 6}, 0.005, 0.001, 0.214, 0.002, 1.466},
          {"AS", {2, 4, 5}, 0.013, 0.012, 0.389, 0.09, 1.028}}},
        {"s2", Architecture::Hybrid, 3, 0.016, 0.667,
         {{"C1", {3, 4, 8}, 0.245, 0.304, 0.324, 0.252, 1.681},
          {"C2", {4, 4, 6}, 0.002, 0.001, 0.375, 0.003, 1.438},
          {"C3", {6, 4, 8}, 0.241, 0.305, 0.606, 0.08, 1.255},
          {"C4", {6, 5, 9}, 0.002, 0.0, 0.375, 0.002, 1.438},
          {"C5", {6, 8, 12}, 0.253, 0.006, 0.626, 0.002, 1.234},
          {"C6", {12, 8, 12}, 0.0, 0.0, 0.397, 0.002, 1.405},
          {"AS", {3, 3, 5}, 0.11, 0.223, 0.758, 0.1, 1.069}}},
        {"s3", Architecture::Hybrid, 4, 0.016, 0.824,
         {{"C1", {4, 5, 11}, 0.252, 0.306, 0.319, 0.219, 1.784},
          {"C2", {7, 5, 10}, 0.021, 0.002, 0.367, 0.002, 1.558},
          {"C3", {8, 5, 11}, 0.249, 0.307, 0.677, 0.062, 1.348},
          {"C4", {8, 6, 12}, 0.002, 0.001, 0.375, 0.002, 1.545},
          {"C5", {8, 9, 16}, 0.348, 0.005, 0.711, 0.001, 1.379},
          {"AS", {2, 3, 7}, 0.006, 0.005, 0.859, 0.017, 0.37}}},
        {"s4", Architecture::Hybrid, 9, 0.016, 0.994,
         {{"C1", {9, 10, 26}, 0.25, 0.306, 0.371, 0.153, 1.798},
          {"C2", {16, 8, 24}, 0.204, 0.005, 0.435, 0.001, 1.7},
          {"C3", {18, 10, 26}, 0.232, 0.299, 0.776, 0.031, 1.376},
          {"C4", {18, 11, 27}, 0.002, 0.001, 0.375, 0.001, 1.623},
          {"C5", {18, 13, 36}, 0.421, 0.004, 0.763, 0.001, 1.528},
          {"AS", {9, 9, 20}, 0.002, 0.001, 0.962, 0.002, 1.032}}},
        {"s5", Architecture::Regular, 2, 0.021, 0.4,
         {{"C1", {2, 3, 5}, 0.734, 0.758, 1.0, 0.0, 1.055},
          {"C2", {3, 3, 4}, 0.127, 0.137, 0.252, 0.001, 1.378},
          {"C3", {4, 3, 5}, 0.035, 0.033, 0.371, 0.001, 1.073},
          {"C4", {4, 3, 5}, 0.035, 0.033, 0.251, 0.001, 1.373},
          {"C5", {4, 4, 6}, 0.033, 0.032, 0.318, 0.006, 1.206},
          {"C6", {6, 4, 6}, 0.011, 0.005, 0.212, 0.003, 1.471},
          {"AS", {2, 6, 8}, 0.096, 0.043, 0.407, 0.001, 1.006}}},
        {"s6", Architecture::Regular, 3, 0.02, 0.667,
         {{"C1", {3, 4, 8}, 0.601, 0.332, 1.0, 0.0, 1.019},
          {"C2", {4, 4, 6}, 0.17, 0.128, 0.377, 0.0, 1.439},
          {"C3", {6, 4, 8}, 0.017, 0.013, 0.531, 0.006, 1.203},
          {"C4", {6, 5, 9}, 0.046, 0.05, 0.376, 0.001, 1.439},
          {"C5", {6, 8, 12}, 0.135, 0.142, 0.627, 0.002, 1.063},
          {"C6", {12, 8, 12}, 0.006, 0.001, 0.395, 0.002, 1.407},
          {"AS", {3, 6, 10}, 0.072, 0.015, 0.888, 0.0, 1.002}}},
        {"s7", Architecture::Regular, 4, 0.019, 0.824,
         {{"C1", {4, 5, 11}, 0.55, 0.207, 1.0, 0.0, 1.008},
          {"C2", {7, 5, 10}, 0.019, 0.014, 0.367, 0.003, 1.554},
          {"C3", {8, 5, 11}, 0.007, 0.002, 1.621, 0.002, 1.246},  // entanglement as printed
          {"C4", {8, 6, 12}, 0.048, 0.033, 0.372, 0.002, 1.549},
          {"C5", {8, 9, 16}, 0.01, 0.004, 0.713, 0.001, 1.134},
          {"AS", {4, 8, 19}, 0.039, 0.012, 0.874, 0.0, 1.0}}},
        {"s8", Architecture::Regular, 9, 0.013, 0.994,
         {{"C1", {9, 10, 26}, infinity, 0.0, 1.0, 0.0, infinity},
          {"C2", {16, 8, 24}, 0.005, 0.002, 0.435, 0.002, 1.562},
          {"C3", {18, 10, 26}, 0.001, 0.001, 0.792, 0.001, 1.203},
          {"C4", {18, 11, 27}, 0.001, 0.001, 0.377, 0.001, 1.621},
          {"C5", {18, 13, 36}, 0.001, 0.001, 0.762, 0.001, 1.234},
          {"AS", {9, 18, 45}, 0.047, 0.006, 1.0, 0.0, 1.0}}},
    };
    return tables;
}

// "s1".."s8", or "hybrid-<q>" / "regular-<q>".
inline const ReferenceTable& find_reference_table(const std::string& which) {
    for (const auto& t : reference_tables()) {
        if (t.name == which) return t;
        if (which == to_string(t.arch) + "-" + std::to_string(t.num_qubits)) return t;
    }
    throw std::invalid_argument("unknown table: " + which);
}

inline const ReferenceTable& find_reference_table(Architecture arch, int num_qubits) {
    for (const auto& t : reference_tables())
        if (t.arch == arch && t.num_qubits == num_qubits) return t;
    throw std::invalid_argument("no reference table for this architecture and width");
}

// Thresholds as printed in a table, with the usual caps and the computed worst case.
inline ThresholdSet printed_thresholds(const ReferenceTable& t, const MetricOptions& opt = {}) {
    ThresholdSet s = complexity_caps(t.num_qubits);
    s.expr_thr = t.expr_thr;
    s.entgl_thr = t.entgl_thr;
    s.expr_max = t.arch == Architecture::Hybrid
                     ? std::log(static_cast<double>(opt.num_classes))
                     : worst_case_expressibility(haar_fidelity_histogram(t.num_qubits, opt.num_bins, opt.epsilon_bin));
    return s;
}

}  // namespace qforge
