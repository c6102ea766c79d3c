#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(QFORGE_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) r.out += buf.data();
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < s.size()) {
        const auto end = s.find('\n', start);
        out.push_back(s.substr(start, end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto end = line.find(',', start);
        out.push_back(line.substr(start, end - start));
        if (end == std::string::npos) return out;
        start = end + 1;
    }
}

const std::string data_flag = std::string(" --data ") + QFORGE_SOURCE_DIR + "/data/mnist";

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("qforge_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Cli, MissingQubitsIsUsageError) { EXPECT_EQ(run("metrics --circuit C2").code, 2); }

TEST(Cli, UnknownCircuitIsUsageError) { EXPECT_EQ(run("metrics --circuit C9 --qubits 2").code, 2); }

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run("").code, 2); }

TEST(Cli, HelpExitsCleanly) { EXPECT_EQ(run("--help").code, 0); }

TEST(Cli, MemoryBound) {
    const auto r = run("memory-bound -n 8 -k 2 -m 2");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "formula=19 oracle=19\n");
    EXPECT_EQ(run("memory-bound -n 6 -k 2 -m 4").code, 2);
}

TEST(Cli, MetricsRegularC2) {
    const auto dir = scratch("metrics");
    const auto r = run("metrics --circuit C2 --qubits 2 --arch regular --inputs 5 --samples 1000 --out " + (dir / "c2").string());
    ASSERT_EQ(r.code, 0);
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 2u);
    const auto f = fields(ls[1]);
    ASSERT_EQ(f.size(), 10u);
    EXPECT_EQ(f[0], "C2");
    EXPECT_EQ(f[2] + f[3] + f[4], "334");
    EXPECT_NEAR(std::stod(f[5]), 0.127, 0.08);
    const auto j = nlohmann::json::parse(std::ifstream(dir / "c2.json"));
    EXPECT_EQ(j.at("params").get<int>(), 3);
    EXPECT_TRUE(fs::exists(dir / "c2.csv"));
}

TEST(Cli, MetricsNineQubitC1IsInfinite) {
    const auto r = run("metrics --circuit C1 --qubits 9 --arch regular --inputs 3 --samples 400");
    ASSERT_EQ(r.code, 0);
    const auto f = fields(lines(r.out).at(1));
    EXPECT_EQ(f[5], "inf");
    EXPECT_EQ(f[9], "inf");
}

TEST(Cli, MetricsFromCircuitFile) {
    const auto dir = scratch("circuit_file");
    nlohmann::json c = {{"num_qubits", 2},
                        {"num_params", 1},
                        {"gates", {{{"kind", "RY"}, {"qubits", {0}}, {"param_slots", {0}}}, {{"kind", "CX"}, {"qubits", {0, 1}}}}}};
    std::ofstream(dir / "bell.json") << c.dump();
    const auto r = run("metrics --circuit " + (dir / "bell.json").string() + " --qubits 2 --inputs 2 --samples 200");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(fields(lines(r.out).at(1))[0], "bell");
    EXPECT_EQ(run("metrics --circuit " + (dir / "bell.json").string() + " --qubits 3").code, 2);
}

TEST(Cli, CapacityExceeded) {
    EXPECT_EQ(run("metrics --circuit C1 --qubits 9 --max-qubits 4").code, 3);
    EXPECT_EQ(run("train --model regular-16q-best --max-qubits 8 --runs 1 --batches 0").code, 3);
}

TEST(Cli, ReproduceTableOne) {
    const auto dir = scratch("repro");
    const auto r = run("reproduce-tables --which s1 --budget desk --seeds 1 --out " + dir.string());
    ASSERT_EQ(r.code, 0);
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 9u);  // header, 7 circuits, thresholds
    for (std::size_t i = 1; i < 8; ++i) EXPECT_EQ(fields(ls[i]).size(), 15u);
    EXPECT_EQ(fields(ls[7])[1], "AS");
    EXPECT_EQ(fields(ls[8])[1], "thresholds");
    EXPECT_TRUE(fs::exists(dir / "s1.csv"));
}

TEST(Cli, UnknownTableIsUsageError) { EXPECT_EQ(run("reproduce-tables --which s42").code, 2); }

TEST(Cli, UnknownModelIsUsageError) { EXPECT_EQ(run("train --model no-such-model --runs 1 --batches 0").code, 2); }

TEST(Cli, SearchWritesLogAndBest) {
    const auto dir = scratch("search");
    const auto args = "search --qubits 2 --trials 15 --inputs 2 --samples 100 --seed 3 --out " + dir.string();
    ASSERT_EQ(run(args).code, 0);
    std::ifstream log(dir / "trials.jsonl");
    int n = 0;
    for (std::string line; std::getline(log, line);) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j.at("trial").get<int>(), n);
        ++n;
    }
    EXPECT_EQ(n, 15);
    const auto best = nlohmann::json::parse(std::ifstream(dir / "best.json"));
    ASSERT_FALSE(best.empty());
    EXPECT_TRUE(best[0].contains("circuit"));
}

TEST(Cli, TrainWritesRunDirectoryAndEvaluateReadsIt) {
    const auto dir = scratch("train");
    const auto r = run("train --model regular-4q-best --task 0v1 --runs 2 --batches 20 --batch-size 4 --train-per-class 10 "
                       "--test-per-class 10 --out " + dir.string() + data_flag);
    ASSERT_EQ(r.code, 0);
    std::vector<fs::path> runs;
    for (const auto& e : fs::directory_iterator(dir)) runs.push_back(e.path());
    ASSERT_EQ(runs.size(), 1u);
    for (const char* f : {"config.json", "history.csv", "model.json", "runs.json"}) EXPECT_TRUE(fs::exists(runs[0] / f)) << f;
    std::ifstream hist(runs[0] / "history.csv");
    std::string header, p0, p1;
    std::getline(hist, header);
    std::getline(hist, p0);
    std::getline(hist, p1);
    EXPECT_EQ(header, "batch,loss_mean,loss_std,accuracy_mean,accuracy_std");
    EXPECT_EQ(fields(p0)[0], "0");
    EXPECT_EQ(fields(p1)[0], "20");

    const auto e = run("evaluate --model " + (runs[0] / "model.json").string() + " --params " + (runs[0] / "runs.json").string() +
                       " --train-per-class 10 --test-per-class 10" + data_flag);
    ASSERT_EQ(e.code, 0);
    const auto f = fields(lines(e.out).at(1));
    EXPECT_EQ(f[1], "20");
}

TEST(Cli, ConfigFileWithFlagOverride) {
    const auto dir = scratch("config");
    std::ofstream(dir / "cfg.json") << R"({"memory-bound": {"n": 16, "k": 3, "m": 2}})";
    const auto from_file = run("--config " + (dir / "cfg.json").string() + " memory-bound");
    EXPECT_EQ(from_file.code, 0);
    EXPECT_EQ(from_file.out, "formula=" + std::to_string(1 + 11 * 4) + " oracle=45\n");
    // flags win over the file
    const auto r = run("--config " + (dir / "cfg.json").string() + " memory-bound -n 4 -k 2");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "formula=13 oracle=13\n");
}

TEST(Cli, Deterministic) {
    const auto a = run("metrics --circuit C4 --qubits 3 --inputs 2 --samples 200 --seed 5");
    const auto b = run("metrics --circuit C4 --qubits 3 --inputs 2 --samples 200 --seed 5 --threads 3");
    EXPECT_EQ(a.out, b.out);
}
