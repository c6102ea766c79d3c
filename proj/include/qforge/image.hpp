#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qforge {

// Row-major 2D grid of reals.
struct Image {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    Image() = default;
    Image(int r, int c, double fill = 0.0) : rows(r), cols(c), values(static_cast<std::size_t>(r * c), fill) {
        if (r < 1 || c < 1) throw std::invalid_argument("Image: dimensions must be positive");
    }
    Image(int r, int c, std::vector<double> v) : rows(r), cols(c), values(std::move(v)) {
        if (r < 1 || c < 1 || values.size() != static_cast<std::size_t>(r * c))
            throw std::invalid_argument("Image: value count does not match dimensions");
    }

    double& operator()(int r, int c) { return values[static_cast<std::size_t>(r * cols + c)]; }
    double operator()(int r, int c) const { return values[static_cast<std::size_t>(r * cols + c)]; }
};

// Images with class indices, as consumed by training and evaluation.
struct LabeledSet {
    std::vector<Image> images;
    std::vector<int> labels;

    std::size_t size() const { return images.size(); }
};

}  // namespace qforge
