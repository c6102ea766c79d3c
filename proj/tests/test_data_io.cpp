#include <gtest/gtest.h>

#include <qforge/data.hpp>

#include <fstream>
#include <set>

using namespace qforge;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("qforge_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

std::vector<std::uint8_t> images_file(std::uint32_t magic, std::uint32_t n, std::uint32_t rows, std::uint32_t cols,
                                      std::size_t pixel_bytes) {
    std::vector<std::uint8_t> b;
    put32(b, magic);
    put32(b, n);
    put32(b, rows);
    put32(b, cols);
    for (std::size_t i = 0; i < pixel_bytes; ++i) b.push_back(static_cast<std::uint8_t>(i * 37 % 256));
    return b;
}

std::vector<std::uint8_t> labels_file(std::uint32_t magic, const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> b;
    put32(b, magic);
    put32(b, static_cast<std::uint32_t>(labels.size()));
    b.insert(b.end(), labels.begin(), labels.end());
    return b;
}

IdxError::Kind kind_of(const fs::path& img, const fs::path& lab) {
    try {
        load_idx(img, lab);
    } catch (const IdxError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an IdxError";
    return IdxError::Kind::Io;
}

// Small synthetic dataset: 3x3 images, digits cycling 0..9.
RawDataset synthetic(int count) {
    RawDataset d;
    d.rows = 3;
    d.cols = 3;
    for (int i = 0; i < count; ++i) {
        d.labels.push_back(static_cast<std::uint8_t>(i % 10));
        for (int p = 0; p < 9; ++p) d.pixels.push_back(static_cast<std::uint8_t>((i * 9 + p) % 256));
    }
    return d;
}

fs::path repo_mnist() { return data_dir(fs::path(QFORGE_SOURCE_DIR) / "data" / "mnist"); }

}  // namespace

TEST(Idx, ParsesWellFormedFiles) {
    TempDir t;
    write_bytes(t.path() / "i", images_file(0x803, 3, 2, 2, 12));
    write_bytes(t.path() / "l", labels_file(0x801, {7, 0, 9}));
    const auto d = load_idx(t.path() / "i", t.path() / "l");
    EXPECT_EQ(d.size(), 3u);
    EXPECT_EQ(d.rows, 2);
    EXPECT_EQ(d.cols, 2);
    EXPECT_EQ(d.labels, (std::vector<std::uint8_t>{7, 0, 9}));
    EXPECT_EQ(d.image(1)[0], static_cast<std::uint8_t>(4 * 37 % 256));
}

TEST(Idx, DistinctErrors) {
    TempDir t;
    const auto good_i = t.path() / "gi", good_l = t.path() / "gl";
    write_bytes(good_i, images_file(0x803, 2, 2, 2, 8));
    write_bytes(good_l, labels_file(0x801, {1, 2}));

    write_bytes(t.path() / "bad_magic", images_file(0x801, 2, 2, 2, 8));
    EXPECT_EQ(kind_of(t.path() / "bad_magic", good_l), IdxError::Kind::BadMagic);
    write_bytes(t.path() / "bad_lmagic", labels_file(0x803, {1, 2}));
    EXPECT_EQ(kind_of(good_i, t.path() / "bad_lmagic"), IdxError::Kind::BadMagic);

    write_bytes(t.path() / "short", images_file(0x803, 2, 2, 2, 7));
    EXPECT_EQ(kind_of(t.path() / "short", good_l), IdxError::Kind::Truncated);
    write_bytes(t.path() / "header_only", {0, 0, 8});
    EXPECT_EQ(kind_of(t.path() / "header_only", good_l), IdxError::Kind::Truncated);

    write_bytes(t.path() / "three", labels_file(0x801, {1, 2, 3}));
    EXPECT_EQ(kind_of(good_i, t.path() / "three"), IdxError::Kind::CountMismatch);

    EXPECT_EQ(kind_of(t.path() / "missing", good_l), IdxError::Kind::Io);
}

TEST(Idx, BundledMnistSubset) {
    const auto d = load_idx_dir(repo_mnist());
    EXPECT_EQ(d.rows, 28);
    EXPECT_EQ(d.cols, 28);
    EXPECT_EQ(d.pixels.size(), d.size() * 784);
    // the header count is the oracle
    std::ifstream f(repo_mnist() / "labels-idx1-ubyte", std::ios::binary);
    std::uint8_t h[8];
    f.read(reinterpret_cast<char*>(h), 8);
    const std::size_t n = (std::size_t{h[4]} << 24) | (std::size_t{h[5]} << 16) | (std::size_t{h[6]} << 8) | h[7];
    EXPECT_EQ(d.size(), n);
    EXPECT_EQ(n, 10000u);
}

TEST(Idx, EmptyDirectoryIsIoError) {
    TempDir t;
    try {
        load_idx_dir(t.path());
        FAIL();
    } catch (const IdxError& e) {
        EXPECT_EQ(e.kind(), IdxError::Kind::Io);
    }
}

TEST(PixelMap, Endpoints) {
    EXPECT_EQ(pixel_to_angle(0), 0.0);
    EXPECT_DOUBLE_EQ(pixel_to_angle(255), pi - 1e-6);
    EXPECT_LT(pixel_to_angle(255), pi);
    for (int v = 1; v < 256; ++v) EXPECT_GT(pixel_to_angle(static_cast<std::uint8_t>(v)), pixel_to_angle(static_cast<std::uint8_t>(v - 1)));
}

TEST(Tasks, Mapping) {
    EXPECT_EQ(task_class(Task::ZeroVsOne, 0), 0);
    EXPECT_EQ(task_class(Task::ZeroVsOne, 1), 1);
    EXPECT_FALSE(task_class(Task::ZeroVsOne, 2));
    EXPECT_EQ(task_class(Task::SevenVsEight, 8), 1);
    EXPECT_EQ(task_class(Task::GreaterThanFour, 4), 0);
    EXPECT_EQ(task_class(Task::GreaterThanFour, 5), 1);
    EXPECT_EQ(task_class(Task::Digits0to3, 3), 3);
    EXPECT_FALSE(task_class(Task::Digits0to3, 4));
    EXPECT_EQ(parse_task("7v8"), Task::SevenVsEight);
    EXPECT_THROW(parse_task("3v5"), std::invalid_argument);
}

TEST(Prepare, ZeroVsOneFilterAndExhaustiveSplit) {
    const auto raw = synthetic(100);
    PrepareOptions opt;
    opt.pad = Padding::None;
    opt.seed = 3;
    const auto d = prepare(raw, opt);
    EXPECT_EQ(d.train.size() + d.test.size(), 20u);
    EXPECT_EQ(d.train.size(), 16u);
    // each synthetic image is unique, so its first pixel identifies it
    std::multiset<double> seen;
    for (const auto* s : {&d.train, &d.test})
        for (std::size_t i = 0; i < s->size(); ++i) {
            EXPECT_TRUE(s->labels[i] == 0 || s->labels[i] == 1);
            seen.insert(s->images[i].values[1]);
        }
    std::multiset<double> expected;
    for (int i = 0; i < 100; ++i)
        if (i % 10 < 2) expected.insert(pixel_to_angle(static_cast<std::uint8_t>((i * 9 + 1) % 256)));
    EXPECT_EQ(seen, expected);
}

TEST(Prepare, DeterministicUnderSeed) {
    const auto raw = synthetic(200);
    PrepareOptions opt;
    opt.task = Task::GreaterThanFour;
    opt.seed = 9;
    const auto a = prepare(raw, opt), b = prepare(raw, opt);
    ASSERT_EQ(a.train.size(), b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train.images[i].values, b.train.images[i].values);
    opt.seed = 10;
    const auto c = prepare(raw, opt);
    bool differs = false;
    for (std::size_t i = 0; i < a.train.size(); ++i) differs |= a.train.labels[i] != c.train.labels[i] || a.train.images[i].values != c.train.images[i].values;
    EXPECT_TRUE(differs);
}

TEST(Prepare, PaddingAndAngleDomain) {
    const auto raw = load_idx_dir(repo_mnist());
    PrepareOptions opt;
    opt.train_per_class = 20;
    opt.test_per_class = 10;
    const auto d = prepare(raw, opt);
    ASSERT_EQ(d.train.size(), 40u);
    ASSERT_EQ(d.test.size(), 20u);
    for (const auto& img : d.train.images) {
        ASSERT_EQ(img.rows, 32);
        ASSERT_EQ(img.cols, 32);
        for (int r = 0; r < 32; ++r)
            for (int c = 0; c < 32; ++c) {
                ASSERT_GE(img(r, c), 0.0);
                ASSERT_LT(img(r, c), pi);
                if (r < 2 || r >= 30 || c < 2 || c >= 30) ASSERT_EQ(img(r, c), 0.0);
            }
    }
    // interior block is the unpadded image
    PrepareOptions plain = opt;
    plain.pad = Padding::None;
    const auto u = prepare(raw, plain);
    for (std::size_t i = 0; i < u.train.size(); ++i)
        for (int r = 0; r < 28; ++r)
            for (int c = 0; c < 28; ++c) ASSERT_EQ(u.train.images[i](r, c), d.train.images[i](r + 2, c + 2));
    int ones = 0;
    for (int l : d.test.labels) ones += l;
    EXPECT_EQ(ones, 10);
}

TEST(Prepare, EmptyClassAndOversizedCaps) {
    RawDataset only_zeros = synthetic(1);
    EXPECT_THROW(prepare(only_zeros, PrepareOptions{}), std::runtime_error);
    PrepareOptions opt;
    opt.pad = Padding::None;
    opt.train_per_class = 50;
    opt.test_per_class = 50;
    EXPECT_THROW(prepare(synthetic(100), opt), std::runtime_error);
}

TEST(Prepare, SaveLoadRoundTrip) {
    TempDir t;
    PrepareOptions opt;
    opt.task = Task::Digits0to3;
    opt.pad = Padding::None;
    opt.seed = 4;
    const auto d = prepare(synthetic(80), opt);
    save_prepared(t.path() / "cache", d);
    const auto back = load_prepared(t.path() / "cache");
    EXPECT_EQ(back.options.task, Task::Digits0to3);
    EXPECT_EQ(back.options.seed, 4u);
    ASSERT_EQ(back.train.size(), d.train.size());
    ASSERT_EQ(back.test.size(), d.test.size());
    for (std::size_t i = 0; i < d.train.size(); ++i) {
        EXPECT_EQ(back.train.labels[i], d.train.labels[i]);
        EXPECT_EQ(back.train.images[i].values, d.train.images[i].values);
    }
    const auto meta = nlohmann::json::parse(std::ifstream(t.path() / "cache.json"));
    EXPECT_EQ(meta.at("rows").get<int>(), 3);
    EXPECT_EQ(meta.at("task").get<std::string>(), "0-3");
}
