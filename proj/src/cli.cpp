#include "plnet/cli.hpp"
#include "plnet/io.hpp"
#include "plnet/metrics.hpp"
#include "plnet/model.hpp"
#include "plnet/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace plnet {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double edge_threshold = 1e-8;

std::string versions_string() {
    return std::string("plnet ") + plnet_version + "; eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." +
           std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION);
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

fs::path prepare_out(const std::string& out) {
    if (out.empty()) {
        throw InputError("an output directory is required");
    }
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) {
        throw InputError("cannot create output directory " + out);
    }
    return fs::path(out);
}

json make_manifest(const std::string& command, const json& config, const json& seed,
                   const std::map<std::string, long long>& timings, const std::vector<std::string>& warnings,
                   const std::vector<std::string>& artifacts) {
    json m;
    m["command"] = command;
    m["config"] = config;
    m["config_digest"] = fnv1a_hex(config.dump());
    m["seed"] = seed;
    m["versions"] = versions_string();
    m["timings_ms"] = timings;
    m["warnings"] = warnings;
    m["artifacts"] = artifacts;
    return m;
}

long long elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since).count();
}

CovStage parse_estimator(const std::string& name) {
    if (name == "shifted") {
        return CovStage::shifted;
    }
    if (name == "projected") {
        return CovStage::projected;
    }
    throw std::invalid_argument("covariance estimator must be shifted or projected, got '" + name + "'");
}

ProjectionMethod parse_projection(const std::string& name) {
    if (name == "splitting") {
        return ProjectionMethod::splitting;
    }
    if (name == "bisection") {
        return ProjectionMethod::bisection;
    }
    throw std::invalid_argument("projection must be splitting or bisection, got '" + name + "'");
}

json graph_json(const GraphSpec& g) {
    return { { "family", to_string(g.family) }, { "p", g.p },
             { "seed", g.seed },                { "edge_value", g.edge_value },
             { "band_width", g.band_width },    { "edge_prob", g.edge_prob },
             { "neg_prob", g.neg_prob },        { "blocks", g.n_blocks } };
}

json optional_number(const std::optional<double>& x) {
    return x ? json(*x) : json(nullptr);
}

json path_json(const PipelineResult& res, const std::vector<std::string>& genes, Eigen::Index n) {
    json j;
    j["genes"] = genes;
    j["n"] = n;
    j["cov_estimator"] = to_string(res.solver_input.stage);
    j["t_star"] = res.projection.t_star;
    j["lambdas"] = res.path.lambdas;
    j["bic"] = res.path.bic_scores;
    j["selected"] = res.selected;
    json converged = json::array(), iterations = json::array(), kkt = json::array();
    json diagonals = json::array(), edges = json::array();
    for (const auto& est : res.path.estimates) {
        converged.push_back(est.converged);
        iterations.push_back(est.iterations);
        kkt.push_back(std::isfinite(est.kkt_residual) ? json(est.kkt_residual) : json(nullptr));
        std::vector<double> diag(est.theta.diagonal().data(), est.theta.diagonal().data() + est.theta.rows());
        diagonals.push_back(diag);
        json list = json::array();
        for (Eigen::Index a = 0; a < est.theta.rows(); ++a) {
            for (Eigen::Index b = a + 1; b < est.theta.cols(); ++b) {
                if (std::abs(est.theta(a, b)) > edge_threshold) {
                    list.push_back({ a, b, est.theta(a, b) });
                }
            }
        }
        edges.push_back(std::move(list));
    }
    j["converged"] = converged;
    j["iterations"] = iterations;
    j["kkt_residual"] = kkt;
    j["diagonals"] = diagonals;
    j["edges"] = edges;
    return j;
}

struct LoadedPath {
    PathResult path;
    std::size_t selected = 0;
};

LoadedPath read_path_json(const std::string& file) {
    json j;
    try {
        j = json::parse(read_text(file));
        LoadedPath out;
        const auto lambdas = j.at("lambdas").get<std::vector<double> >();
        const auto& diagonals = j.at("diagonals");
        const auto& edges = j.at("edges");
        const auto& converged = j.at("converged");
        if (diagonals.size() != lambdas.size() || edges.size() != lambdas.size() || lambdas.empty()) {
            throw InputError(file + ": path arrays have inconsistent lengths");
        }
        out.path.lambdas = lambdas;
        out.path.bic_scores = j.at("bic").get<std::vector<double> >();
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
            const auto diag = diagonals[k].get<std::vector<double> >();
            const auto p = static_cast<Eigen::Index>(diag.size());
            PrecisionEstimate est;
            est.lambda = lambdas[k];
            est.converged = converged.at(k).get<bool>();
            est.theta = Matrix::Zero(p, p);
            for (Eigen::Index a = 0; a < p; ++a) {
                est.theta(a, a) = diag[a];
            }
            for (const auto& e : edges[k]) {
                const auto a = e.at(0).get<Eigen::Index>();
                const auto b = e.at(1).get<Eigen::Index>();
                if (a < 0 || b < 0 || a >= p || b >= p) {
                    throw InputError(file + ": edge index out of range at path entry " + std::to_string(k));
                }
                est.theta(a, b) = est.theta(b, a) = e.at(2).get<double>();
            }
            out.path.estimates.push_back(std::move(est));
        }
        out.selected = j.at("selected").get<std::size_t>();
        if (out.selected >= lambdas.size()) {
            throw InputError(file + ": selected index out of range");
        }
        return out;
    } catch (const json::exception& e) {
        throw InputError(file + ": malformed path file: " + e.what());
    }
}

double parse_lambda(const std::string& text) {
    double v = 0;
    std::size_t used = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !(v >= 0) || !std::isfinite(v)) {
        throw std::invalid_argument("--lambda must be 'auto' or a nonnegative number, got '" + text + "'");
    }
    return v;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

std::string fixed2(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

struct MeanSd {
    double mean = 0;
    double sd = 0;
    int count = 0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd out;
    out.count = static_cast<int>(xs.size());
    if (xs.empty()) {
        out.mean = std::nan("");
        out.sd = std::nan("");
        return out;
    }
    for (double x : xs) {
        out.mean += x;
    }
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) {
            ss += (x - out.mean) * (x - out.mean);
        }
        out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

// JSON parsing with the source line of every value, for bench config messages.

class CountingIterator {
public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    CountingIterator() = default;
    CountingIterator(const char* p, const char** cursor) : p_(p), cursor_(cursor) {}

    reference operator*() const { return *p_; }
    CountingIterator& operator++() {
        ++p_;
        if (cursor_) {
            *cursor_ = p_;
        }
        return *this;
    }
    CountingIterator operator++(int) {
        CountingIterator old = *this;
        ++*this;
        return old;
    }
    bool operator==(const CountingIterator& other) const { return p_ == other.p_; }
    bool operator!=(const CountingIterator& other) const { return p_ != other.p_; }

private:
    const char* p_ = nullptr;
    const char** cursor_ = nullptr;
};

struct TrackedJson {
    json root;
    std::map<std::string, int> lines;
};

int line_at(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

TrackedJson parse_tracked(const std::string& text, const std::string& source) {
    TrackedJson out;
    const char* cursor = text.data();

    struct Frame {
        bool array = false;
        std::string pointer;
        int index = -1;
    };
    std::vector<Frame> stack;

    auto here = [&]() {
        // Last consumed non-blank character; number tokens read one character ahead.
        std::size_t pos = static_cast<std::size_t>(cursor - text.data());
        while (pos > 0 && std::isspace(static_cast<unsigned char>(text[pos - 1]))) {
            --pos;
        }
        return line_at(text, pos > 0 ? pos - 1 : 0);
    };
    auto escape = [](const std::string& key) {
        std::string s;
        for (char c : key) {
            s += c == '~' ? std::string("~0") : c == '/' ? std::string("~1") : std::string(1, c);
        }
        return s;
    };
    std::string pending;
    auto element = [&]() -> std::string {
        if (stack.empty()) {
            return "";
        }
        Frame& top = stack.back();
        if (top.array) {
            ++top.index;
            return top.pointer + "/" + std::to_string(top.index);
        }
        return pending;
    };

    json::parser_callback_t cb = [&](int, json::parse_event_t event, json& parsed) {
        switch (event) {
        case json::parse_event_t::object_start:
        case json::parse_event_t::array_start: {
            const std::string ptr = element();
            out.lines.emplace(ptr, here());
            stack.push_back({ event == json::parse_event_t::array_start, ptr, -1 });
            break;
        }
        case json::parse_event_t::key:
            pending = stack.back().pointer + "/" + escape(parsed.get<std::string>());
            out.lines[pending] = here();
            break;
        case json::parse_event_t::value: {
            const std::string ptr = element();
            out.lines.emplace(ptr, here());
            break;
        }
        case json::parse_event_t::object_end:
        case json::parse_event_t::array_end:
            stack.pop_back();
            break;
        }
        return true;
    };

    try {
        CountingIterator first(text.data(), &cursor);
        CountingIterator last(text.data() + text.size(), nullptr);
        out.root = json::parse(first, last, cb);
    } catch (const json::parse_error& e) {
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        std::string what = e.what();
        const auto detail = what.find(": ", what.find("column"));
        what = detail == std::string::npos ? what : what.substr(detail + 2);
        throw InputError(source + ":" + std::to_string(line_at(text, byte)) + ": invalid JSON: " + what);
    }
    return out;
}

class ConfigReader {
public:
    ConfigReader(const TrackedJson& doc, std::string source) : doc_(doc), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
        std::string p = ptr;
        auto it = doc_.lines.find(p);
        while (it == doc_.lines.end() && !p.empty()) {
            p = p.substr(0, p.rfind('/'));
            it = doc_.lines.find(p);
        }
        const int line = it == doc_.lines.end() ? 1 : it->second;
        throw InputError(source_ + ":" + std::to_string(line) + ": " + (ptr.empty() ? "" : ptr + ": ") + msg);
    }

    void only_keys(const json& obj, const std::string& ptr, const std::set<std::string>& allowed) const {
        if (!obj.is_object()) {
            fail(ptr, "expected an object");
        }
        for (const auto& item : obj.items()) {
            if (!allowed.count(item.key())) {
                fail(ptr + "/" + item.key(), "unknown key '" + item.key() + "'");
            }
        }
    }

    template <class T>
    T integer(const json& obj, const std::string& ptr, const std::string& key, T fallback, long long min) const {
        if (!obj.contains(key)) {
            return fallback;
        }
        const json& v = obj.at(key);
        if (!v.is_number_integer()) {
            fail(ptr + "/" + key, "expected an integer");
        }
        if (v.is_number_unsigned() ? false : v.get<long long>() < min) {
            fail(ptr + "/" + key, "must be at least " + std::to_string(min));
        }
        return v.get<T>();
    }

    double number(const json& obj, const std::string& ptr, const std::string& key, double fallback) const {
        if (!obj.contains(key)) {
            return fallback;
        }
        const json& v = obj.at(key);
        if (!v.is_number()) {
            fail(ptr + "/" + key, "expected a number");
        }
        return v.get<double>();
    }

    std::string text(const json& obj, const std::string& ptr, const std::string& key, const std::string& fallback,
                     bool required = false) const {
        if (!obj.contains(key)) {
            if (required) {
                fail(ptr, "missing required key '" + key + "'");
            }
            return fallback;
        }
        const json& v = obj.at(key);
        if (!v.is_string()) {
            fail(ptr + "/" + key, "expected a string");
        }
        return v.get<std::string>();
    }

    bool boolean(const json& obj, const std::string& ptr, const std::string& key, bool fallback) const {
        if (!obj.contains(key)) {
            return fallback;
        }
        const json& v = obj.at(key);
        if (!v.is_boolean()) {
            fail(ptr + "/" + key, "expected true or false");
        }
        return v.get<bool>();
    }

private:
    const TrackedJson& doc_;
    std::string source_;
};

std::string upper_env(const std::string& name) {
    std::string out = "PLNET_";
    for (char c : name) {
        out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

void bind_env(CLI::App* sub) {
    for (CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "h") {
            continue;
        }
        opt->envname(upper_env(name));
    }
}

}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<NamedScenario> parse_bench_config(const std::string& text, const std::string& source) {
    const TrackedJson doc = parse_tracked(text, source);
    const ConfigReader rd(doc, source);
    const json& root = doc.root;
    rd.only_keys(root, "", { "schema", "scenarios" });
    if (!root.contains("schema")) {
        rd.fail("", "missing required key 'schema'");
    }
    if (!root["schema"].is_number_integer() || root["schema"].get<long long>() != 1) {
        rd.fail("/schema", "unsupported schema version, expected 1");
    }
    if (!root.contains("scenarios") || !root["scenarios"].is_array()) {
        rd.fail(root.contains("scenarios") ? "/scenarios" : "", "'scenarios' must be a list");
    }
    if (root["scenarios"].empty()) {
        rd.fail("/scenarios", "no scenarios");
    }

    std::vector<NamedScenario> out;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < root["scenarios"].size(); ++i) {
        const std::string ptr = "/scenarios/" + std::to_string(i);
        const json& s = root["scenarios"][i];
        rd.only_keys(s, ptr,
                     { "id", "graph", "n", "mu", "libsize_sd", "replicates", "seed", "grid", "grid_ratio",
                       "regenerate_graph", "cov_estimator", "rho", "tol", "max_iters" });
        NamedScenario ns;
        ns.id = rd.text(s, ptr, "id", "scenario" + std::to_string(i + 1));
        if (ns.id.empty() || ns.id.find_first_of(",\"\n") != std::string::npos) {
            rd.fail(ptr + "/id", "id must be non-empty without commas, quotes or newlines");
        }
        if (!ids.insert(ns.id).second) {
            rd.fail(ptr + "/id", "duplicate scenario id '" + ns.id + "'");
        }

        if (!s.contains("graph")) {
            rd.fail(ptr, "missing required key 'graph'");
        }
        const std::string gptr = ptr + "/graph";
        const json& g = s["graph"];
        rd.only_keys(g, gptr, { "family", "p", "seed", "edge_value", "band_width", "edge_prob", "neg_prob", "blocks" });
        ScenarioConfig& c = ns.config;
        try {
            c.graph.family = parse_graph_family(rd.text(g, gptr, "family", "", true));
        } catch (const std::invalid_argument& e) {
            rd.fail(gptr + "/family", e.what());
        }
        c.graph.p = rd.integer<int>(g, gptr, "p", c.graph.p, 2);
        c.graph.seed = rd.integer<std::uint64_t>(g, gptr, "seed", c.graph.seed, 0);
        c.graph.edge_value = rd.number(g, gptr, "edge_value", c.graph.edge_value);
        c.graph.band_width = rd.integer<int>(g, gptr, "band_width", c.graph.band_width, 1);
        c.graph.edge_prob = rd.number(g, gptr, "edge_prob", c.graph.edge_prob);
        c.graph.neg_prob = rd.number(g, gptr, "neg_prob", c.graph.neg_prob);
        c.graph.n_blocks = rd.integer<int>(g, gptr, "blocks", c.graph.n_blocks, 1);
        try {
            c.graph.validate();
        } catch (const std::invalid_argument& e) {
            rd.fail(gptr, e.what());
        }

        c.n = rd.integer<int>(s, ptr, "n", c.n, 2);
        c.mu_level = rd.number(s, ptr, "mu", c.mu_level);
        c.libsize_sd = rd.number(s, ptr, "libsize_sd", c.libsize_sd);
        c.n_replicates = rd.integer<int>(s, ptr, "replicates", c.n_replicates, 1);
        c.master_seed = rd.integer<std::uint64_t>(s, ptr, "seed", c.master_seed, 0);
        c.lambda_grid_size = rd.integer<int>(s, ptr, "grid", c.lambda_grid_size, 2);
        c.grid_ratio = rd.number(s, ptr, "grid_ratio", c.grid_ratio);
        c.regenerate_graph = rd.boolean(s, ptr, "regenerate_graph", c.regenerate_graph);
        try {
            c.estimator = parse_estimator(rd.text(s, ptr, "cov_estimator", "shifted"));
        } catch (const std::invalid_argument& e) {
            rd.fail(ptr + "/cov_estimator", e.what());
        }
        c.admm.rho = rd.number(s, ptr, "rho", c.admm.rho);
        c.admm.tol_primal = c.admm.tol_dual = rd.number(s, ptr, "tol", c.admm.tol_primal);
        c.admm.max_iters = rd.integer<int>(s, ptr, "max_iters", c.admm.max_iters, 1);
        if (!(c.grid_ratio > 0 && c.grid_ratio < 1)) {
            rd.fail(ptr + "/grid_ratio", "must lie strictly between 0 and 1");
        }
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            rd.fail(ptr, e.what());
        }
        out.push_back(std::move(ns));
    }
    return out;
}

void cmd_simulate(const SimulateArgs& args, const std::string& command_line) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioConfig cfg;
    cfg.graph = args.graph;
    cfg.graph.seed = args.seed;
    cfg.master_seed = args.seed;
    cfg.n = args.n;
    cfg.mu_level = args.mu;
    cfg.libsize_sd = args.libsize_sd;
    cfg.validate();
    const fs::path dir = prepare_out(args.out);

    const SimulatedData sim = simulate_replicate(cfg, 0);
    const long long sample_ms = elapsed_ms(start);

    write_counts_csv((dir / "counts.csv").string(), sim.data);
    write_lib_sizes((dir / "libsizes.csv").string(), sim.data);
    write_matrix_csv((dir / "truth.csv").string(), sim.truth.theta);

    json config = { { "graph", graph_json(cfg.graph) }, { "n", cfg.n },
                    { "mu", cfg.mu_level },             { "libsize_sd", cfg.libsize_sd },
                    { "make_pd_margin", pd_margin } };
    json manifest = make_manifest(command_line, config, args.seed, { { "simulate", sample_ms } }, {},
                                  { "counts.csv", "libsizes.csv", "truth.csv" });
    manifest["zero_fraction"] = zero_fraction(sim.data.counts);
    manifest["n_true_edges"] = sim.truth.support.size();
    write_text((dir / "manifest.json").string(), dump(manifest));
}

void cmd_fit(const FitArgs& args, const std::string& command_line) {
    PipelineOptions popts;
    popts.estimator = parse_estimator(args.cov_estimator);
    popts.projection = parse_projection(args.projection);
    popts.grid_size = args.grid;
    popts.grid_ratio = args.grid_ratio;
    popts.admm.rho = args.rho;
    popts.admm.tol_primal = args.tol;
    popts.admm.tol_dual = args.tol;
    popts.admm.max_iters = args.max_iters;
    popts.admm.validate();
    if (args.lambda != "auto") {
        popts.fixed_lambda = parse_lambda(args.lambda);
    } else if (args.grid < 2 || !(args.grid_ratio > 0 && args.grid_ratio < 1)) {
        throw std::invalid_argument("--grid must be >= 2 and --grid-ratio in (0, 1)");
    }
    const fs::path dir = prepare_out(args.out);

    const auto start = std::chrono::steady_clock::now();
    CountMatrix data = read_counts(args.input, args.transpose);
    if (args.libsizes == "auto") {
        data.lib_sizes = estimate_lib_sizes(data.counts);
    } else {
        read_lib_sizes(args.libsizes, data);
    }
    data.validate();
    const long long read_ms = elapsed_ms(start);

    PipelineResult res = run_pipeline(data, popts);
    res.timings_ms["read"] = read_ms;
    const auto genes = gene_labels(data);
    const PrecisionEstimate& chosen = res.selected_estimate();

    write_matrix_csv((dir / "theta.csv").string(), chosen.theta);
    write_matrix_csv((dir / "sigma.csv").string(), res.solver_input.matrix);
    write_edges_tsv((dir / "edges.tsv").string(), chosen.theta, genes);
    write_text((dir / "path.json").string(), dump(path_json(res, genes, data.n_cells())));

    json config = { { "input", args.input },
                    { "libsizes", args.libsizes },
                    { "lambda", args.lambda },
                    { "grid", args.grid },
                    { "grid_ratio", args.grid_ratio },
                    { "cov_estimator", args.cov_estimator },
                    { "projection", args.projection },
                    { "rho", args.rho },
                    { "tol", args.tol },
                    { "max_iters", args.max_iters },
                    { "transpose", args.transpose } };
    json manifest = make_manifest(command_line, config, nullptr, res.timings_ms, res.warnings,
                                  { "theta.csv", "sigma.csv", "edges.tsv", "path.json" });
    manifest["n_cells"] = data.n_cells();
    manifest["n_genes"] = data.n_genes();
    manifest["t_star"] = res.projection.t_star;
    manifest["projection_certificate_gap"] = res.projection.certificate_gap;
    manifest["n_clamped_moments"] = res.moment_diagnostics.n_clamped_entries;
    manifest["selected_lambda"] = res.selected_lambda();
    manifest["selected_converged"] = chosen.converged;
    manifest["n_edges"] = count_edges(chosen.theta);
    write_text((dir / "manifest.json").string(), dump(manifest));
}

void cmd_eval(const EvalArgs& args, const std::string& command_line) {
    const auto start = std::chrono::steady_clock::now();
    const bool from_path = args.est.size() >= 5 && args.est.compare(args.est.size() - 5, 5, ".json") == 0;
    std::vector<std::string> metrics = args.metrics;
    if (metrics.empty()) {
        metrics = from_path ? std::vector<std::string>{ "aupr", "auc", "tpr", "tdr", "frobenius" }
                            : std::vector<std::string>{ "tpr", "tdr", "frobenius" };
    }
    const std::set<std::string> known = { "aupr", "auc", "tpr", "tdr", "frobenius" };
    for (const auto& m : metrics) {
        if (!known.count(m)) {
            throw std::invalid_argument("unknown metric '" + m + "'");
        }
        if ((m == "aupr" || m == "auc") && !from_path) {
            throw InputError("metric '" + m + "' needs a path estimate (path.json), not a single matrix");
        }
    }
    if (args.out.empty()) {
        throw InputError("an output file is required");
    }

    const Matrix truth_theta = read_matrix_csv(args.truth);
    if (truth_theta.rows() != truth_theta.cols()) {
        throw InputError(args.truth + ": truth matrix is not square");
    }
    const TrueNetwork truth = TrueNetwork::from_theta(truth_theta);

    LoadedPath loaded;
    if (from_path) {
        loaded = read_path_json(args.est);
    } else {
        PrecisionEstimate est;
        est.theta = read_matrix_csv(args.est);
        loaded.path.lambdas.push_back(0);
        loaded.path.estimates.push_back(std::move(est));
    }
    for (const auto& est : loaded.path.estimates) {
        if (est.theta.rows() != truth.theta.rows() || est.theta.cols() != truth.theta.cols()) {
            throw InputError("estimate is " + std::to_string(est.theta.rows()) + "x" + std::to_string(est.theta.cols()) +
                             " but truth is " + std::to_string(truth.theta.rows()) + "x" +
                             std::to_string(truth.theta.cols()));
        }
    }
    const PrecisionEstimate& point = loaded.path.estimates[loaded.selected];
    const auto [tpr, tdr] = tpr_tdr(point, truth);

    json out = json::object();
    for (const auto& m : metrics) {
        if (m == "aupr") {
            out["aupr"] = aupr(loaded.path, truth);
        } else if (m == "auc") {
            out["auc"] = auc(loaded.path, truth);
        } else if (m == "tpr") {
            out["tpr"] = tpr;
        } else if (m == "tdr") {
            out["tdr"] = optional_number(tdr);
        } else if (m == "frobenius") {
            out["frobenius"] = frobenius_risk(point, truth);
        }
    }
    write_text(args.out, dump(out));

    const fs::path manifest_path = fs::path(args.out).parent_path() / "eval_manifest.json";
    json config = { { "est", args.est }, { "truth", args.truth }, { "metrics", metrics } };
    json manifest = make_manifest(command_line, config, nullptr, { { "eval", elapsed_ms(start) } }, {},
                                  { fs::path(args.out).filename().string() });
    write_text(manifest_path.string(), dump(manifest));
}

void cmd_bench(const BenchArgs& args, const std::string& command_line) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<NamedScenario> scenarios = parse_bench_config(read_text(args.config), args.config);
    if (args.replicates) {
        if (*args.replicates < 1) {
            throw std::invalid_argument("--replicates must be at least 1");
        }
        for (auto& s : scenarios) {
            s.config.n_replicates = *args.replicates;
        }
    }
    const fs::path dir = prepare_out(args.out);

    std::ostringstream results;
    results << "scenario,replicate,seed,aupr,auc,tpr,tdr,frobenius_risk,lambda_bic,wall_ms,ok,n_edges_est,"
               "zero_fraction,t_star,n_clamped,n_nonconverged,best_tpr,best_tdr,error\n";
    std::ostringstream summary;
    summary << "scenario,replicates,failed,aupr_mean,aupr_sd,auc_mean,auc_sd,tpr_mean,tpr_sd,tdr_mean,tdr_sd,"
               "frobenius_risk_mean,frobenius_risk_sd,zero_fraction_mean,aupr,auc,tpr,tdr,frobenius_risk\n";
    std::map<std::string, long long> timings;
    std::vector<std::string> warnings;
    json config = json::array();

    for (const auto& s : scenarios) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto records = run_scenario(s.config, args.jobs);
        timings[s.id] = elapsed_ms(t0);

        std::vector<double> a, u, tp, td, fr, zf;
        int failed = 0;
        for (const auto& r : records) {
            results << s.id << ',' << r.replicate << ',' << r.replicate_seed << ',' << format_double(r.aupr) << ','
                    << format_double(r.auc) << ',' << format_double(r.tpr) << ','
                    << (r.tdr ? format_double(*r.tdr) : "") << ',' << format_double(r.frobenius_risk) << ','
                    << format_double(r.lambda_bic) << ',' << r.wall_ms << ',' << (r.ok ? 1 : 0) << ','
                    << r.n_edges_est << ',' << format_double(r.zero_fraction) << ',' << format_double(r.t_star)
                    << ',' << r.n_clamped << ',' << r.n_nonconverged << ',' << format_double(r.best_tpr) << ','
                    << format_double(r.best_tdr) << ',' << csv_field(r.error) << '\n';
            if (!r.ok) {
                ++failed;
                warnings.push_back(s.id + " replicate " + std::to_string(r.replicate) + " failed: " + r.error);
                continue;
            }
            a.push_back(r.aupr);
            u.push_back(r.auc);
            tp.push_back(r.tpr);
            if (r.tdr) {
                td.push_back(*r.tdr);
            }
            fr.push_back(r.frobenius_risk);
            zf.push_back(r.zero_fraction);
        }
        const MeanSd ma = mean_sd(a), mu = mean_sd(u), mtp = mean_sd(tp), mtd = mean_sd(td), mfr = mean_sd(fr);
        auto table = [](const MeanSd& m) { return m.count ? fixed2(m.mean) + " (" + fixed2(m.sd) + ")" : ""; };
        summary << s.id << ',' << records.size() << ',' << failed;
        for (const MeanSd* m : { &ma, &mu, &mtp, &mtd, &mfr }) {
            summary << ',' << format_double(m->mean) << ',' << format_double(m->sd);
        }
        summary << ',' << format_double(mean_sd(zf).mean);
        for (const MeanSd* m : { &ma, &mu, &mtp, &mtd, &mfr }) {
            summary << ',' << table(*m);
        }
        summary << '\n';
        std::cerr << s.id << ": " << records.size() - failed << "/" << records.size() << " replicates, mean AUPR "
                  << fixed2(ma.mean) << "\n";

        config.push_back({ { "id", s.id },
                           { "graph", graph_json(s.config.graph) },
                           { "n", s.config.n },
                           { "mu", s.config.mu_level },
                           { "libsize_sd", s.config.libsize_sd },
                           { "replicates", s.config.n_replicates },
                           { "seed", s.config.master_seed },
                           { "grid", s.config.lambda_grid_size },
                           { "grid_ratio", s.config.grid_ratio },
                           { "regenerate_graph", s.config.regenerate_graph },
                           { "cov_estimator", to_string(s.config.estimator) },
                           { "rho", s.config.admm.rho },
                           { "tol", s.config.admm.tol_primal },
                           { "max_iters", s.config.admm.max_iters } });
    }
    write_text((dir / "results.csv").string(), results.str());
    write_text((dir / "summary.csv").string(), summary.str());
    timings["total"] = elapsed_ms(start);
    json resolved = { { "schema", 1 }, { "scenarios", config }, { "make_pd_margin", pd_margin } };
    json manifest = make_manifest(command_line, resolved, nullptr, timings, warnings, { "results.csv", "summary.csv" });
    manifest["jobs"] = args.jobs;
    write_text((dir / "manifest.json").string(), dump(manifest));
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{ "Sparse network inference for count data under the Poisson log-normal model", "plnet" };
    app.require_subcommand(1);
    app.set_version_flag("--version", versions_string());

    SimulateArgs sim;
    std::string family = "banded";
    auto* s = app.add_subcommand("simulate", "Draw a count matrix from a simulated network");
    s->add_option("--graph", family, "Graph family")
        ->check(CLI::IsMember({ "banded", "random", "scalefree", "blocked" }))
        ->capture_default_str();
    s->add_option("--p", sim.graph.p, "Number of genes")->capture_default_str();
    s->add_option("--n", sim.n, "Number of cells")->capture_default_str();
    s->add_option("--mu", sim.mu, "Common latent mean")->capture_default_str();
    s->add_option("--libsize-sd", sim.libsize_sd, "Log-scale SD of library sizes")->capture_default_str();
    s->add_option("--seed", sim.seed, "Seed of graph and sample")->capture_default_str();
    s->add_option("--out", sim.out, "Output directory")->required();
    s->add_option("--edge-value", sim.graph.edge_value)->capture_default_str();
    s->add_option("--band-width", sim.graph.band_width)->capture_default_str();
    s->add_option("--edge-prob", sim.graph.edge_prob)->capture_default_str();
    s->add_option("--neg-prob", sim.graph.neg_prob)->capture_default_str();
    s->add_option("--blocks", sim.graph.n_blocks)->capture_default_str();
    bind_env(s);

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "Estimate a sparse precision matrix from counts");
    f->add_option("--input", fit.input, "counts.csv or counts.mtx")->required();
    f->add_option("--libsizes", fit.libsizes, "'auto' (row sums) or a cell_id,S file")->capture_default_str();
    f->add_option("--lambda", fit.lambda, "'auto' (BIC over a path) or a fixed penalty")->capture_default_str();
    f->add_option("--grid", fit.grid, "Path length")->capture_default_str();
    f->add_option("--grid-ratio", fit.grid_ratio, "Smallest over largest penalty")->capture_default_str();
    f->add_option("--cov-estimator", fit.cov_estimator, "Solver input")
        ->check(CLI::IsMember({ "shifted", "projected" }))
        ->capture_default_str();
    f->add_option("--projection", fit.projection, "PSD projection method")
        ->check(CLI::IsMember({ "splitting", "bisection" }))
        ->capture_default_str();
    f->add_option("--rho", fit.rho)->capture_default_str();
    f->add_option("--tol", fit.tol, "Primal and dual tolerance")->capture_default_str();
    f->add_option("--max-iters", fit.max_iters)->capture_default_str();
    f->add_flag("--transpose", fit.transpose, "Input has genes as rows");
    f->add_option("--out", fit.out, "Output directory")->required();
    bind_env(f);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Score an estimate against a true network");
    e->add_option("--est", ev.est, "theta.csv or path.json")->required();
    e->add_option("--truth", ev.truth, "truth.csv")->required();
    e->add_option("--metrics", ev.metrics, "Comma-separated subset of aupr,auc,tpr,tdr,frobenius")->delimiter(',');
    e->add_option("--out", ev.out, "metrics.json")->required();
    bind_env(e);

    BenchArgs bench;
    bench.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    int replicates = 0;
    auto* b = app.add_subcommand("bench", "Run simulation scenarios from a config file");
    b->add_option("--config", bench.config, "bench.json")->required();
    b->add_option("--out", bench.out, "Output directory")->required();
    auto* rep = b->add_option("--replicates", replicates, "Override every scenario's replicate count");
    b->add_option("--jobs", bench.jobs, "Worker threads")->capture_default_str();
    bind_env(b);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? 0 : 2;
    }

    const std::string command_line = "plnet " + app.get_subcommands().front()->get_name();
    try {
        if (*s) {
            sim.graph.family = parse_graph_family(family);
            cmd_simulate(sim, command_line);
        } else if (*f) {
            cmd_fit(fit, command_line);
        } else if (*e) {
            cmd_eval(ev, command_line);
        } else if (*b) {
            if (*rep) {
                bench.replicates = replicates;
            }
            cmd_bench(bench, command_line);
        }
    } catch (const InputError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::overflow_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const ConvergenceError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}

}
