#ifndef PLNET_CLI_HPP
#define PLNET_CLI_HPP

#include "graphs.hpp"
#include "scenario.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace plnet {

inline constexpr const char* plnet_version = "0.1.0";

struct SimulateArgs {
    GraphSpec graph;
    int n = 2000;
    double mu = -1.8;
    double libsize_sd = 0.1;
    std::uint64_t seed = 1;
    std::string out;
};

struct FitArgs {
    std::string input;
    /// `auto` or a `cell_id,S` file.
    std::string libsizes = "auto";
    /// `auto` or a fixed penalty.
    std::string lambda = "auto";
    int grid = 50;
    double grid_ratio = 0.01;
    std::string cov_estimator = "shifted";
    std::string projection = "splitting";
    double rho = 1.0;
    double tol = 1e-6;
    int max_iters = 10000;
    bool transpose = false;
    std::string out;
};

struct EvalArgs {
    /// `theta.csv` or `path.json`.
    std::string est;
    std::string truth;
    /// Empty means every metric the estimate supports.
    std::vector<std::string> metrics;
    std::string out;
};

struct BenchArgs {
    std::string config;
    std::string out;
    std::optional<int> replicates;
    int jobs = 1;
};

struct NamedScenario {
    std::string id;
    ScenarioConfig config;
};

/**
 * Parses a bench config `{"schema": 1, "scenarios": [...]}`. Errors are
 * `InputError`s prefixed with `source:line:` of the offending value.
 */
std::vector<NamedScenario> parse_bench_config(const std::string& text, const std::string& source = "config");

/// Hex FNV-1a 64 digest.
std::string fnv1a_hex(const std::string& text);

/// Each command writes its artifacts plus `manifest.json` into `out`.
void cmd_simulate(const SimulateArgs& args, const std::string& command_line = "simulate");
void cmd_fit(const FitArgs& args, const std::string& command_line = "fit");
void cmd_eval(const EvalArgs& args, const std::string& command_line = "eval");
void cmd_bench(const BenchArgs& args, const std::string& command_line = "bench");

/**
 * Full command-line entry point. Returns the process exit code: 0 on success,
 * 2 for invalid input or flags, 3 when no usable estimate exists, 1 otherwise.
 */
int run_cli(int argc, const char* const* argv);

}

#endif
