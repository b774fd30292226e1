#ifndef PLNET_SCENARIO_HPP
#define PLNET_SCENARIO_HPP

#include "dtrace.hpp"
#include "graphs.hpp"
#include "types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace plnet {

struct ScenarioConfig {
    GraphSpec graph;
    int n = 2000;
    /// Common latent mean of every gene.
    double mu_level = -1.8;
    /// Library sizes are `exp(N(log 10, libsize_sd^2))`.
    double libsize_sd = 0.1;
    int n_replicates = 1;
    std::uint64_t master_seed = 1;
    int lambda_grid_size = 50;
    double grid_ratio = 0.01;
    /// Draw a fresh graph per replicate instead of sharing one built from `graph.seed`.
    bool regenerate_graph = false;
    CovStage estimator = CovStage::shifted;
    AdmmOptions admm;

    void validate() const;
};

struct MetricsRecord {
    int replicate = 0;
    std::uint64_t replicate_seed = 0;
    bool ok = false;
    std::string error;

    double aupr = 0;
    double auc = 0;
    double tpr = 0;
    /// Unset when the selected fit has no edges.
    std::optional<double> tdr;
    double frobenius_risk = 0;
    double lambda_bic = 0;
    int n_edges_est = 0;

    double zero_fraction = 0;
    double t_star = 0;
    int n_clamped = 0;
    int n_nonconverged = 0;
    /// Best (TPR, TDR) pair over the path, ranked by `min(TPR, TDR)`.
    double best_tpr = 0;
    double best_tdr = 0;
    long long wall_ms = 0;
};

/// Replicate seed: a SplitMix64 mix of the master seed and replicate index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Fraction of zero entries.
double zero_fraction(const Matrix& counts);

/// One synthetic data set of a scenario, plus the truth it was drawn from.
struct SimulatedData {
    TrueNetwork truth;
    CountMatrix data;
};

/**
 * Graph, library sizes and counts of replicate `replicate`. `data.lib_sizes`
 * holds the drawn library sizes; `run_scenario` replaces them by row sums
 * before estimation, as an analyst would.
 */
SimulatedData simulate_replicate(const ScenarioConfig& config, int replicate);

/**
 * Simulates and scores `config.n_replicates` replicates. A replicate that
 * throws is recorded with `ok = false`. Replicates run on up to `jobs` threads
 * and are returned in replicate order.
 */
std::vector<MetricsRecord> run_scenario(const ScenarioConfig& config, int jobs = 1);

}

#endif
