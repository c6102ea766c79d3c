#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gates.hpp"
#include "image.hpp"
#include "random.hpp"

namespace qforge {

struct RawDataset {
    int rows = 28;
    int cols = 28;
    std::vector<std::uint8_t> pixels;  // count * rows * cols
    std::vector<std::uint8_t> labels;

    std::size_t size() const { return labels.size(); }
    const std::uint8_t* image(std::size_t i) const { return pixels.data() + i * static_cast<std::size_t>(rows * cols); }
};

class IdxError : public std::runtime_error {
public:
    enum class Kind { Io, BadMagic, Truncated, CountMismatch };
    IdxError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IdxError(IdxError::Kind::Io, "cannot open " + p.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) | b[off + 3];
}

inline void need(const std::vector<std::uint8_t>& b, std::size_t n, const std::filesystem::path& p) {
    if (b.size() < n) throw IdxError(IdxError::Kind::Truncated, "truncated IDX file " + p.string());
}

}  // namespace detail

inline constexpr std::uint32_t idx_images_magic = 0x00000803;
inline constexpr std::uint32_t idx_labels_magic = 0x00000801;

inline RawDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    const auto img = detail::read_file(images_path);
    detail::need(img, 16, images_path);
    if (detail::be32(img, 0) != idx_images_magic)
        throw IdxError(IdxError::Kind::BadMagic, "wrong magic in image file " + images_path.string());
    const std::uint32_t n = detail::be32(img, 4), rows = detail::be32(img, 8), cols = detail::be32(img, 12);
    detail::need(img, 16 + std::size_t{n} * rows * cols, images_path);

    const auto lab = detail::read_file(labels_path);
    detail::need(lab, 8, labels_path);
    if (detail::be32(lab, 0) != idx_labels_magic)
        throw IdxError(IdxError::Kind::BadMagic, "wrong magic in label file " + labels_path.string());
    const std::uint32_t nl = detail::be32(lab, 4);
    if (nl != n) throw IdxError(IdxError::Kind::CountMismatch, "count mismatch between image and label files");
    detail::need(lab, 8 + std::size_t{nl}, labels_path);

    RawDataset d;
    d.rows = static_cast<int>(rows);
    d.cols = static_cast<int>(cols);
    d.pixels.assign(img.begin() + 16, img.begin() + 16 + static_cast<std::ptrdiff_t>(std::size_t{n} * rows * cols));
    d.labels.assign(lab.begin() + 8, lab.begin() + 8 + static_cast<std::ptrdiff_t>(nl));
    for (auto l : d.labels)
        if (l > 9) throw std::runtime_error("label outside 0..9 in " + labels_path.string());
    return d;
}

// Directory from QCNN_FORGE_DATA, else `fallback`.
inline std::filesystem::path data_dir(const std::filesystem::path& fallback = "data/mnist") {
    if (const char* env = std::getenv("QCNN_FORGE_DATA"); env && *env) return env;
    return fallback;
}

// First image/label file pair found in `dir` under the usual names.
inline RawDataset load_idx_dir(const std::filesystem::path& dir) {
    const std::array<std::pair<const char*, const char*>, 3> names = {{{"images-idx3-ubyte", "labels-idx1-ubyte"},
                                                                     {"train-images-idx3-ubyte", "train-labels-idx1-ubyte"},
                                                                     {"t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"}}};
    for (auto [i, l] : names)
        if (std::filesystem::exists(dir / i) && std::filesystem::exists(dir / l)) return load_idx(dir / i, dir / l);
    throw IdxError(IdxError::Kind::Io, "no IDX image/label pair in " + dir.string());
}

enum class Task { ZeroVsOne, SevenVsEight, GreaterThanFour, Digits0to3 };

inline std::string to_string(Task t) {
    switch (t) {
        case Task::ZeroVsOne: return "0v1";
        case Task::SevenVsEight: return "7v8";
        case Task::GreaterThanFour: return "gt4";
        case Task::Digits0to3: return "0-3";
    }
    return "?";
}

inline Task parse_task(const std::string& s) {
    for (Task t : {Task::ZeroVsOne, Task::SevenVsEight, Task::GreaterThanFour, Task::Digits0to3})
        if (to_string(t) == s) return t;
    throw std::invalid_argument("unknown task: " + s + " (expected 0v1, 7v8, gt4 or 0-3)");
}

inline int task_num_classes(Task t) { return t == Task::Digits0to3 ? 4 : 2; }

// Class index of a digit under the task, or nothing when the digit is dropped.
inline std::optional<int> task_class(Task t, int digit) {
    switch (t) {
        case Task::ZeroVsOne: if (digit == 0 || digit == 1) return digit; break;
        case Task::SevenVsEight: if (digit == 7 || digit == 8) return digit - 7; break;
        case Task::GreaterThanFour: return digit > 4 ? 1 : 0;
        case Task::Digits0to3: if (digit <= 3) return digit; break;
    }
    return std::nullopt;
}

enum class Padding { None, Pad32 };

inline constexpr double angle_delta = 1e-6;

// Pixel byte to an angle in [0, pi).
inline double pixel_to_angle(std::uint8_t v) { return v / 255.0 * (pi - angle_delta); }

struct PrepareOptions {
    Task task = Task::ZeroVsOne;
    Padding pad = Padding::Pad32;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    int train_per_class = -1;  // with both caps set, each class contributes exactly these counts
    int test_per_class = -1;
};

struct PreparedDataset {
    PrepareOptions options;
    LabeledSet train;
    LabeledSet test;
};

inline Image to_angle_image(const RawDataset& raw, std::size_t i, Padding pad) {
    const int off = pad == Padding::Pad32 ? 2 : 0;
    Image img(raw.rows + 2 * off, raw.cols + 2 * off);
    const auto* px = raw.image(i);
    for (int r = 0; r < raw.rows; ++r)
        for (int c = 0; c < raw.cols; ++c) img(r + off, c + off) = pixel_to_angle(px[r * raw.cols + c]);
    return img;
}

inline PreparedDataset prepare(const RawDataset& raw, const PrepareOptions& opt) {
    const int k = task_num_classes(opt.task);
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < raw.size(); ++i)
        if (auto c = task_class(opt.task, raw.labels[i])) by_class[static_cast<std::size_t>(*c)].push_back(i);
    for (int c = 0; c < k; ++c)
        if (by_class[static_cast<std::size_t>(c)].empty())
            throw std::runtime_error("prepare: class " + std::to_string(c) + " is empty after filtering");

    PreparedDataset out;
    out.options = opt;
    auto push = [&](LabeledSet& s, std::size_t i, int c) {
        s.images.push_back(to_angle_image(raw, i, opt.pad));
        s.labels.push_back(c);
    };
    Rng rng = make_rng(opt.seed, 21);
    const bool capped = opt.train_per_class >= 0 && opt.test_per_class >= 0;
    if (capped) {
        for (int c = 0; c < k; ++c) {
            auto& ids = by_class[static_cast<std::size_t>(c)];
            std::shuffle(ids.begin(), ids.end(), rng);
            const auto ntr = static_cast<std::size_t>(opt.train_per_class), nte = static_cast<std::size_t>(opt.test_per_class);
            if (ids.size() < ntr + nte)
                throw std::runtime_error("prepare: class " + std::to_string(c) + " has only " + std::to_string(ids.size()) +
                                         " examples");
            for (std::size_t j = 0; j < ntr; ++j) push(out.train, ids[j], c);
            for (std::size_t j = ntr; j < ntr + nte; ++j) push(out.test, ids[j], c);
        }
    } else {
        if (!(opt.train_fraction > 0.0 && opt.train_fraction < 1.0))
            throw std::invalid_argument("prepare: train fraction must lie in (0, 1)");
        std::vector<std::pair<std::size_t, int>> all;
        for (int c = 0; c < k; ++c)
            for (auto i : by_class[static_cast<std::size_t>(c)]) all.emplace_back(i, c);
        std::sort(all.begin(), all.end());
        std::shuffle(all.begin(), all.end(), rng);
        const auto ntr = static_cast<std::size_t>(opt.train_fraction * static_cast<double>(all.size()));
        for (std::size_t j = 0; j < all.size(); ++j) push(j < ntr ? out.train : out.test, all[j].first, all[j].second);
    }
    return out;
}

// Flat little-endian float64 dump plus a JSON sidecar describing it.
inline void save_prepared(const std::filesystem::path& stem, const PreparedDataset& d) {
    auto write_set = [](std::ofstream& f, const LabeledSet& s) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double label = s.labels[i];
            f.write(reinterpret_cast<const char*>(&label), sizeof label);
            f.write(reinterpret_cast<const char*>(s.images[i].values.data()),
                    static_cast<std::streamsize>(s.images[i].values.size() * sizeof(double)));
        }
    };
    const int rows = d.train.size() ? d.train.images[0].rows : d.test.images.at(0).rows;
    const int cols = d.train.size() ? d.train.images[0].cols : d.test.images.at(0).cols;
    std::ofstream bin(stem.string() + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write " + stem.string() + ".bin");
    write_set(bin, d.train);
    write_set(bin, d.test);
    nlohmann::json meta = {{"rows", rows},
                           {"cols", cols},
                           {"train", d.train.size()},
                           {"test", d.test.size()},
                           {"task", to_string(d.options.task)},
                           {"pad", d.options.pad == Padding::Pad32 ? "pad32" : "none"},
                           {"seed", d.options.seed},
                           {"train_fraction", d.options.train_fraction},
                           {"train_per_class", d.options.train_per_class},
                           {"test_per_class", d.options.test_per_class},
                           {"angle_scale", (pi - angle_delta) / 255.0}};
    std::ofstream(stem.string() + ".json") << meta.dump(2) << "\n";
}

inline PreparedDataset load_prepared(const std::filesystem::path& stem) {
    std::ifstream js(stem.string() + ".json");
    if (!js) throw std::runtime_error("cannot read " + stem.string() + ".json");
    const auto meta = nlohmann::json::parse(js);
    PreparedDataset d;
    d.options.task = parse_task(meta.at("task").get<std::string>());
    d.options.pad = meta.at("pad").get<std::string>() == "pad32" ? Padding::Pad32 : Padding::None;
    d.options.seed = meta.at("seed").get<std::uint64_t>();
    d.options.train_fraction = meta.value("train_fraction", 0.8);
    d.options.train_per_class = meta.value("train_per_class", -1);
    d.options.test_per_class = meta.value("test_per_class", -1);
    const int rows = meta.at("rows").get<int>(), cols = meta.at("cols").get<int>();
    std::ifstream bin(stem.string() + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot read " + stem.string() + ".bin");
    auto read_set = [&](LabeledSet& s, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            double label = 0;
            Image img(rows, cols);
            bin.read(reinterpret_cast<char*>(&label), sizeof label);
            bin.read(reinterpret_cast<char*>(img.values.data()), static_cast<std::streamsize>(img.values.size() * sizeof(double)));
            if (!bin) throw std::runtime_error("truncated dataset cache " + stem.string() + ".bin");
            s.labels.push_back(static_cast<int>(label));
            s.images.push_back(std::move(img));
        }
    };
    read_set(d.train, meta.at("train").get<std::size_t>());
    read_set(d.test, meta.at("test").get<std::size_t>());
    return d;
}

}  // namespace qforge
