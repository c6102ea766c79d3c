// Command-line front end: metrics, search, train, evaluate, grid-search,
// memory-bound and reproduce-tables.

#include <CLI11.hpp>

#include <qforge/data.hpp>
#include <qforge/encodings.hpp>
#include <qforge/library.hpp>
#include <qforge/metrics.hpp>
#include <qforge/models.hpp>
#include <qforge/reproduce.hpp>
#include <qforge/search.hpp>
#include <qforge/training.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace qforge;
namespace fs = std::filesystem;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_capacity = 3;

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// JSON config files: top-level keys are option names, nested objects belong
// to the subcommand of the same name.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
        }
        std::vector<CLI::ConfigItem> items;
        flatten(j, {}, items);
        return items;
    }

private:
    static void flatten(const nlohmann::json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& out) {
        if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        for (const auto& [key, v] : j.items()) {
            if (v.is_object()) {
                auto p = parents;
                p.push_back(key);
                flatten(v, p, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (v.is_array())
                for (const auto& e : v) item.inputs.push_back(e.is_string() ? e.get<std::string>() : e.dump());
            else
                item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
            out.push_back(std::move(item));
        }
    }
};

struct Globals {
    int threads = default_threads();
    int max_qubits = 20;
};

void check_capacity(int qubits, const Globals& g) {
    if (qubits > g.max_qubits)
        throw CapacityError("model needs " + std::to_string(qubits) + " qubits, above the configured maximum of " +
                            std::to_string(g.max_qubits) + " (--max-qubits)");
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", std::gmtime(&t));
    return buf;
}

void write_text(const fs::path& p, const std::string& s) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << s;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw std::invalid_argument("cannot read " + p.string());
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(p.string() + " is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------- models

struct AnyModel {
    std::optional<RegularModel> regular;
    std::optional<HybridModel> hybrid;

    int num_qubits() const {
        if (regular) return regular->num_qubits();
        int q = 0;
        for (const auto& l : hybrid->layers) q = std::max(q, l.conv.num_qubits());
        return q;
    }
    int image_size() const {
        if (regular) return regular->image_rows;
        int s = 1;
        for (auto it = hybrid->layers.rbegin(); it != hybrid->layers.rend(); ++it) {
            if (it->pooling) s *= *it->pooling;
            s = (s - 1) * it->stride + it->kernel;
        }
        return s;
    }
    nlohmann::json json() const { return regular ? to_json(*regular) : to_json(*hybrid); }
    Classifier classifier() const { return regular ? make_classifier(*regular) : make_classifier(*hybrid); }
};

// Alias, grid model name, hybrid pyramid name ("typeII-C2") or a JSON file.
AnyModel resolve_model(const std::string& ref) {
    AnyModel m;
    if (ref == "regular-16q-best") m.regular = find_grid_model("U3-U3-U3->Pool-C2");
    else if (ref == "regular-4q-best") m.regular = find_grid_model("U3-U3-U3-U3->C5");
    else if (ref == "regular-1q-best") m.regular = find_grid_model("Rx-Ry-Rz-Rx-Ry->U3");
    else if (ref.rfind("typeI-", 0) == 0) m.hybrid = hybrid_pyramid(HybridVariant::TypeI, ref.substr(6), 32);
    else if (ref.rfind("typeII-", 0) == 0) m.hybrid = hybrid_pyramid(HybridVariant::TypeII, ref.substr(7), 32);
    else if (fs::exists(ref)) {
        const auto j = read_json(ref);
        if (j.value("type", std::string("regular")) == "hybrid") m.hybrid = hybrid_model_from_json(j);
        else m.regular = regular_model_from_json(j);
    } else {
        try {
            m.regular = find_grid_model(ref);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("unknown model '" + ref +
                                        "' (expected an alias, a grid model name, typeI-/typeII-<circuit>, or a JSON file)");
        }
    }
    return m;
}

// ---------------------------------------------------------------- data

struct DataFlags {
    std::string task = "0v1";
    std::string data;
    int train_per_class = 500;
    int test_per_class = 250;
    std::uint64_t seed = 0;
};

void add_data_flags(CLI::App* c, DataFlags& d) {
    c->add_option("--task", d.task, "0v1, 7v8, gt4 or 0-3")->capture_default_str();
    c->add_option("--data", d.data, "IDX directory (default: $QCNN_FORGE_DATA or data/mnist)");
    c->add_option("--train-per-class", d.train_per_class, "training images per class (-1: 80/20 split)")->capture_default_str();
    c->add_option("--test-per-class", d.test_per_class, "test images per class")->capture_default_str();
}

PreparedDataset load_task(const DataFlags& d, int image_size) {
    const fs::path dir = d.data.empty() ? data_dir() : fs::path(d.data);
    PrepareOptions opt;
    opt.task = parse_task(d.task);
    opt.seed = d.seed;
    opt.train_per_class = d.train_per_class;
    opt.test_per_class = d.test_per_class;
    if (image_size == 32) opt.pad = Padding::Pad32;
    else if (image_size == 28) opt.pad = Padding::None;
    else throw std::invalid_argument("models must take 28x28 or 32x32 images, this one takes " + std::to_string(image_size));
    return prepare(load_idx_dir(dir), opt);
}

// ---------------------------------------------------------------- training flags

struct TrainFlags {
    int runs = 5;
    int batches = 200;
    int batch_size = 25;
    int eval_every = 20;
    double lr = 0.01;
    double eps = 0.1;
    std::string out = "runs";
};

void add_train_flags(CLI::App* c, TrainFlags& t) {
    c->add_option("--runs", t.runs, "independent runs")->capture_default_str();
    c->add_option("--batches", t.batches, "optimizer steps per run")->capture_default_str();
    c->add_option("--batch-size", t.batch_size)->capture_default_str();
    c->add_option("--eval-every", t.eval_every)->capture_default_str();
    c->add_option("--lr", t.lr, "Adam learning rate")->capture_default_str();
    c->add_option("--fd-epsilon", t.eps, "finite-difference step")->capture_default_str();
}

TrainConfig make_train_config(const TrainFlags& f, std::uint64_t seed, int threads, int num_classes) {
    TrainConfig cfg;
    cfg.runs = f.runs;
    cfg.num_batches = f.batches;
    cfg.batch_size = f.batch_size;
    cfg.eval_every = f.eval_every;
    cfg.learning_rate = f.lr;
    cfg.fd_epsilon = f.eps;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.bsoc.num_classes = num_classes;
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------- commands

struct MetricsFlags {
    std::string circuit;
    int qubits = 0;
    std::string arch = "regular";
    int inputs = 10;
    int samples = 2000;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_metrics(const MetricsFlags& f, const Globals& g) {
    check_capacity(f.qubits, g);
    const Architecture arch = parse_architecture(f.arch);
    ParameterizedCircuit c;
    std::string id = f.circuit;
    if (fs::exists(f.circuit)) {
        c = circuit_from_json(read_json(f.circuit));
        if (c.num_qubits() != f.qubits)
            throw std::invalid_argument("circuit file has " + std::to_string(c.num_qubits()) + " qubits, --qubits says " +
                                        std::to_string(f.qubits));
        id = fs::path(f.circuit).stem().string();
    } else {
        c = named_circuit(f.circuit, f.qubits, arch);
    }
    const auto thresholds = default_thresholds(arch, f.qubits);
    auto rep = evaluate_circuit(c, arch, {f.inputs, f.samples, f.seed}, thresholds);
    rep.circuit_id = id;
    const std::string csv = csv_header() + "\n" + to_csv_row(rep) + "\n";
    std::cout << csv;
    if (!f.out.empty()) {
        fs::path stem(f.out);
        if (stem.extension() == ".csv" || stem.extension() == ".json") stem.replace_extension();
        write_text(stem.string() + ".csv", csv);
        write_text(stem.string() + ".json", to_json(rep).dump(2) + "\n");
    }
    return 0;
}

struct SearchFlags {
    int qubits = 0;
    std::string arch = "regular";
    int trials = 2000;
    int max_duplicates = 10;
    int inputs = 10;
    int samples = 2000;
    std::uint64_t seed = 0;
    bool random = false;
    double gamma = 0.2;
    int batch = 1;
    int top = 10;
    std::string out = "search";
};

int cmd_search(const SearchFlags& f, const Globals& g) {
    check_capacity(f.qubits, g);
    SearchConfig cfg;
    cfg.num_qubits = f.qubits;
    cfg.architecture = parse_architecture(f.arch);
    cfg.num_trials = f.trials;
    cfg.max_duplicates = f.max_duplicates;
    cfg.budget = {f.inputs, f.samples, f.seed};
    cfg.seed = f.seed;
    cfg.random_mode = f.random;
    cfg.gamma = f.gamma;
    cfg.proposal_batch = f.batch;
    cfg.threads = g.threads;
    const auto res = run_search(cfg);
    fs::create_directories(f.out);
    {
        std::ofstream log(fs::path(f.out) / "trials.jsonl");
        write_trial_log(log, res.log);
    }
    nlohmann::json best = nlohmann::json::array();
    for (std::size_t i = 0; i < res.ranked.size() && static_cast<int>(i) < f.top; ++i) {
        const auto& r = res.ranked[i];
        auto j = to_json(r, false);
        j["circuit"] = to_json(decode(r.genome));
        best.push_back(j);
    }
    write_text(fs::path(f.out) / "best.json", best.dump(2) + "\n");
    std::cout << "trial,l_pqc,expr,entgl,params,depth,gates\n";
    for (std::size_t i = 0; i < res.ranked.size() && i < 5; ++i) {
        const auto& r = res.ranked[i];
        std::cout << r.trial << "," << r.l_pqc << "," << r.expr << "," << r.entgl << "," << r.complexity.params << ","
                  << r.complexity.depth << "," << r.complexity.gates << "\n";
    }
    std::cerr << "wrote " << (fs::path(f.out) / "trials.jsonl").string() << " and best.json\n";
    return 0;
}

int cmd_train(const std::string& model_ref, DataFlags d, const TrainFlags& t, std::uint64_t seed, const Globals& g) {
    const AnyModel m = resolve_model(model_ref);
    check_capacity(m.num_qubits(), g);
    d.seed = seed;
    const auto data = load_task(d, m.image_size());
    const auto cfg = make_train_config(t, seed, g.threads, task_num_classes(parse_task(d.task)));
    const auto runs = train_runs(m.classifier(), data.train, data.test, cfg);

    fs::path dir = fs::path(t.out) / timestamp();
    for (int k = 1; fs::exists(dir); ++k) dir = fs::path(t.out) / (timestamp() + "-" + std::to_string(k));
    fs::create_directories(dir);
    auto cj = to_json(cfg);
    cj["task"] = d.task;
    cj["train_per_class"] = d.train_per_class;
    cj["test_per_class"] = d.test_per_class;
    cj["train_size"] = data.train.size();
    cj["test_size"] = data.test.size();
    cj["model"] = model_ref;
    write_text(dir / "config.json", cj.dump(2) + "\n");
    write_text(dir / "history.csv", history_csv(runs));
    write_text(dir / "model.json", m.json().dump(2) + "\n");
    nlohmann::json rj = nlohmann::json::array();
    for (const auto& r : runs) rj.push_back(to_json(r));
    write_text(dir / "runs.json", rj.dump() + "\n");

    std::cout << history_csv(runs);
    double mean = 0.0;
    for (const auto& r : runs) mean += r.final_accuracy();
    std::cerr << "mean final accuracy " << mean / static_cast<double>(runs.size()) << "% over " << runs.size()
              << " runs; wrote " << dir.string() << "\n";
    return 0;
}

int cmd_evaluate(const std::string& model_ref, const std::string& params_path, DataFlags d, std::uint64_t seed,
                 const Globals& g) {
    const AnyModel m = resolve_model(model_ref);
    check_capacity(m.num_qubits(), g);
    const auto j = read_json(params_path);
    std::vector<double> params;
    if (j.is_array() && !j.empty() && j[0].is_object()) params = train_run_from_json(j[0]).final_params;
    else if (j.is_object()) params = train_run_from_json(j).final_params;
    else params = j.get<std::vector<double>>();
    const auto c = m.classifier();
    if (static_cast<int>(params.size()) != c.num_params)
        throw std::invalid_argument("parameter file holds " + std::to_string(params.size()) + " values, the model needs " +
                                    std::to_string(c.num_params));
    d.seed = seed;
    const auto data = load_task(d, m.image_size());
    BsocSpec spec;
    spec.num_classes = task_num_classes(parse_task(d.task));
    const auto e = evaluate(c, params, data.test, spec, g.threads);
    std::cout << "model,test_size,accuracy,loss\n" << c.name << "," << data.test.size() << "," << e.accuracy << "," << e.loss << "\n";
    return 0;
}

int cmd_grid_search(int qubits, DataFlags d, TrainFlags t, std::uint64_t seed, const std::string& out, const Globals& g) {
    check_capacity(qubits, g);
    const auto menu = grid_search_menu(qubits);
    d.seed = seed;
    const auto data = load_task(d, 32);
    const auto cfg = make_train_config(t, seed, g.threads, task_num_classes(parse_task(d.task)));
    struct Entry {
        std::string name;
        double mean = 0.0, std = 0.0;
    };
    std::vector<Entry> ranked;
    for (const auto& m : menu) {
        const auto runs = train_runs(make_classifier(m), data.train, data.test, cfg);
        Entry e{m.name};
        for (const auto& r : runs) e.mean += r.final_accuracy();
        e.mean /= static_cast<double>(runs.size());
        for (const auto& r : runs) e.std += (r.final_accuracy() - e.mean) * (r.final_accuracy() - e.mean);
        e.std = std::sqrt(e.std / static_cast<double>(runs.size()));
        std::cerr << m.name << ": " << e.mean << "%\n";
        ranked.push_back(e);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Entry& a, const Entry& b) { return a.mean > b.mean; });
    std::ostringstream csv;
    csv << "rank,model,accuracy_mean,accuracy_std\n";
    for (std::size_t i = 0; i < ranked.size(); ++i)
        csv << i + 1 << "," << ranked[i].name << "," << ranked[i].mean << "," << ranked[i].std << "\n";
    std::cout << csv.str();
    if (!out.empty()) write_text(out, csv.str());
    return 0;
}

int cmd_memory_bound(long long n, long long k, long long m) {
    std::cout << "formula=" << memory_bound(n, k, m) << " oracle=" << memory_liveness_peak(n, k, m) << "\n";
    return 0;
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string triple(const Complexity& c) {
    return std::to_string(c.params) + "/" + std::to_string(c.depth) + "/" + std::to_string(c.gates);
}

int cmd_reproduce(const std::string& which, const std::string& budget, int seeds, std::uint64_t seed, const std::string& out,
                  const Globals& g) {
    std::vector<const ReferenceTable*> tables;
    if (which == "s9" || which == "all") {
        for (const auto& t : reference_tables()) tables.push_back(&t);
    } else {
        tables.push_back(&find_reference_table(which));
    }
    SamplingBudget b{10, 2000, seed};
    if (budget == "paper") {
        b = {100, 10000, seed};
        std::cerr << "warning: the paper budget runs 50x the desk budget per circuit; expect hours for the 9-qubit tables\n";
    } else if (budget != "desk") {
        throw std::invalid_argument("--budget must be desk or paper");
    }
    for (const auto* t : tables) check_capacity(t->num_qubits, g);
    if (!out.empty()) fs::create_directories(out);

    for (const auto* t : tables) {
        const auto r = reproduce_table(*t, b, seeds, g.threads);
        std::ostringstream csv;
        csv << "table,row,cmplx_printed,cmplx_computed,cmplx_pass,expr_printed,expr_computed,expr_delta,expr_pass,"
               "entgl_printed,entgl_computed,entgl_delta,entgl_pass,lpqc_printed,lpqc_computed\n";
        int cells = 0, passed = 0;
        for (const auto& row : r.rows) {
            const bool cp = row.printed_complexity == row.computed_complexity;
            csv << t->name << "," << row.id << "," << triple(row.printed_complexity) << "," << triple(row.computed_complexity) << ","
                << (cp ? "pass" : "FAIL") << "," << fmt(row.expr.printed) << "," << fmt(row.expr.computed) << ","
                << fmt(row.expr.delta()) << "," << (row.expr.pass ? "pass" : "FAIL") << "," << fmt(row.entgl.printed) << ","
                << fmt(row.entgl.computed) << "," << fmt(row.entgl.delta()) << "," << (row.entgl.pass ? "pass" : "FAIL") << ","
                << fmt(row.l_pqc.printed) << "," << fmt(row.l_pqc.computed) << "\n";
            cells += 2;
            passed += row.expr.pass + row.entgl.pass;
        }
        csv << t->name << ",thresholds," << triple({t->num_qubits, 3 * t->num_qubits, 5 * t->num_qubits}) << ","
            << triple({t->num_qubits, 3 * t->num_qubits, 5 * t->num_qubits}) << ",pass," << fmt(r.expr_thr.printed) << ","
            << fmt(r.expr_thr.computed) << "," << fmt(r.expr_thr.delta()) << "," << (r.expr_thr.pass ? "pass" : "FAIL") << ","
            << fmt(r.entgl_thr.printed) << "," << fmt(r.entgl_thr.computed) << "," << fmt(r.entgl_thr.delta()) << ","
            << (r.entgl_thr.pass ? "pass" : "FAIL") << ",,\n";
        std::cout << csv.str();
        std::cerr << t->name << " (" << to_string(t->arch) << ", " << t->num_qubits << " qubits): " << passed << "/" << cells
                  << " metric cells within tolerance\n";
        if (!out.empty()) write_text(fs::path(out) / (t->name + ".csv"), csv.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qforge: circuit metrics, ansatz search and QCNN training"};
    app.fallthrough();  // global options may follow the subcommand
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file with option values; flags on the command line take precedence");

    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--threads", g.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--max-qubits", g.max_qubits, "largest simulated register")->capture_default_str();

    MetricsFlags mf;
    auto* metrics = app.add_subcommand("metrics", "expressibility, entanglement, complexity and L_PQC of one circuit");
    metrics->add_option("--circuit", mf.circuit, "C1..C6, AS, or a circuit JSON file")->required();
    metrics->add_option("--qubits", mf.qubits)->required()->check(CLI::PositiveNumber);
    metrics->add_option("--arch", mf.arch, "hybrid or regular")->capture_default_str();
    metrics->add_option("--inputs", mf.inputs, "sampled inputs |C|")->capture_default_str();
    metrics->add_option("--samples", mf.samples, "weight samples |S| per input")->capture_default_str();
    metrics->add_option("--seed", mf.seed)->capture_default_str();
    metrics->add_option("--out", mf.out, "file stem for .csv and .json output");

    SearchFlags sf;
    auto* search = app.add_subcommand("search", "ansatz search minimizing L_PQC");
    search->add_option("--qubits", sf.qubits)->required()->check(CLI::PositiveNumber);
    search->add_option("--arch", sf.arch)->capture_default_str();
    search->add_option("--trials", sf.trials)->capture_default_str();
    search->add_option("--max-duplicates", sf.max_duplicates)->capture_default_str();
    search->add_option("--inputs", sf.inputs)->capture_default_str();
    search->add_option("--samples", sf.samples)->capture_default_str();
    search->add_option("--seed", sf.seed)->capture_default_str();
    search->add_flag("--random", sf.random, "uniform proposals instead of the surrogate");
    search->add_option("--gamma", sf.gamma, "good/rest quantile of the surrogate")->capture_default_str();
    search->add_option("--proposal-batch", sf.batch, "proposals per surrogate update")->capture_default_str();
    search->add_option("--top", sf.top, "circuits kept in best.json")->capture_default_str();
    search->add_option("--out", sf.out, "output directory")->capture_default_str();

    std::string model_ref;
    DataFlags df;
    TrainFlags tf;
    auto* train_cmd = app.add_subcommand("train", "train a model, several seeded runs");
    train_cmd->add_option("--model", model_ref, "alias, grid model name, typeI-/typeII-<circuit>, or model JSON")->required();
    train_cmd->add_option("--seed", seed)->capture_default_str();
    train_cmd->add_option("--out", tf.out, "runs directory")->capture_default_str();
    add_data_flags(train_cmd, df);
    add_train_flags(train_cmd, tf);

    std::string params_path;
    auto* eval_cmd = app.add_subcommand("evaluate", "test accuracy and loss of trained parameters");
    eval_cmd->add_option("--model", model_ref)->required();
    eval_cmd->add_option("--params", params_path, "runs.json, a TrainRun JSON, or a JSON array of numbers")->required();
    eval_cmd->add_option("--seed", seed, "data split seed")->capture_default_str();
    add_data_flags(eval_cmd, df);

    int grid_qubits = 0;
    std::string grid_out;
    TrainFlags gf;
    gf.runs = 1;
    auto* grid = app.add_subcommand("grid-search", "train every grid model at one width, ranked by final accuracy");
    grid->add_option("--qubits", grid_qubits, "1, 4 or 16")->required();
    grid->add_option("--seed", seed)->capture_default_str();
    grid->add_option("--out", grid_out, "CSV output file");
    add_data_flags(grid, df);
    add_train_flags(grid, gf);

    long long mb_n = 0, mb_k = 0, mb_m = 0;
    auto* mem = app.add_subcommand("memory-bound", "peak live values of the classical fragment evaluation");
    mem->add_option("-n", mb_n, "image side")->required();
    mem->add_option("-k", mb_k, "kernel side")->required();
    mem->add_option("-m", mb_m, "stride / reduction factor")->required();

    std::string which = "s9", budget = "desk", repro_out;
    int repro_seeds = 3;
    auto* repro = app.add_subcommand("reproduce-tables", "recompute the published metric tables side by side");
    repro->add_option("--which", which, "s1..s8 (hybrid 2/3/4/9, regular 2/3/4/9), s9 or all for every table")->capture_default_str();
    repro->add_option("--budget", budget, "desk or paper")->capture_default_str();
    repro->add_option("--seeds", repro_seeds, "seeds averaged per circuit")->capture_default_str();
    repro->add_option("--seed", seed, "first seed")->capture_default_str();
    repro->add_option("--out", repro_out, "directory for one CSV per table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*metrics) return cmd_metrics(mf, g);
        if (*search) return cmd_search(sf, g);
        if (*train_cmd) return cmd_train(model_ref, df, tf, seed, g);
        if (*eval_cmd) return cmd_evaluate(model_ref, params_path, df, seed, g);
        if (*grid) return cmd_grid_search(grid_qubits, df, gf, seed, grid_out, g);
        if (*mem) return cmd_memory_bound(mb_n, mb_k, mb_m);
        if (*repro) return cmd_reproduce(which, budget, repro_seeds, seed, repro_out, g);
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_capacity;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const IdxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_usage;
}
