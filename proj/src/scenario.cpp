#include "plnet/scenario.hpp"
#include "plnet/linalg.hpp"
#include "plnet/metrics.hpp"
#include "plnet/model.hpp"
#include "plnet/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

namespace plnet {

void ScenarioConfig::validate() const {
    graph.validate();
    if (n < 2) {
        throw std::invalid_argument("scenario needs n >= 2");
    }
    if (!(libsize_sd > 0)) {
        throw std::invalid_argument("library size sd must be positive");
    }
    if (n_replicates < 1) {
        throw std::invalid_argument("scenario needs at least one replicate");
    }
    if (lambda_grid_size < 2) {
        throw std::invalid_argument("lambda grid needs at least two values");
    }
    if (estimator == CovStage::raw) {
        throw std::invalid_argument("estimator must be projected or shifted");
    }
    admm.validate();
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(master) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

double zero_fraction(const Matrix& counts) {
    if (counts.size() == 0) {
        return 0;
    }
    return static_cast<double>((counts.array() == 0).count()) / static_cast<double>(counts.size());
}

SimulatedData simulate_replicate(const ScenarioConfig& config, int replicate) {
    const std::uint64_t seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(replicate));
    GraphSpec spec = config.graph;
    if (config.regenerate_graph) {
        spec.seed = derive_seed(seed, 0);
    }

    SimulatedData out;
    out.truth = gen_graph(spec);

    LatentParams params;
    params.mu = Vector::Constant(spec.p, config.mu_level);
    params.sigma = out.truth.theta.inverse();
    symmetrize(params.sigma);

    std::mt19937_64 lib_rng(derive_seed(seed, 1));
    std::lognormal_distribution<double> lib_dist(std::log(10.0), config.libsize_sd);
    Vector lib_sizes(config.n);
    for (int i = 0; i < config.n; ++i) {
        lib_sizes(i) = lib_dist(lib_rng);
    }

    out.data = pln_sample(params, lib_sizes, derive_seed(seed, 2));
    return out;
}

namespace {

MetricsRecord score_replicate(const ScenarioConfig& config, int replicate) {
    const auto start = std::chrono::steady_clock::now();
    MetricsRecord rec;
    rec.replicate = replicate;
    rec.replicate_seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(replicate));
    try {
        SimulatedData sim = simulate_replicate(config, replicate);
        sim.data.lib_sizes = estimate_lib_sizes(sim.data.counts);
        rec.zero_fraction = zero_fraction(sim.data.counts);

        PipelineOptions popts;
        popts.estimator = config.estimator;
        popts.grid_size = config.lambda_grid_size;
        popts.grid_ratio = config.grid_ratio;
        popts.admm = config.admm;
        PipelineResult fit = run_pipeline(sim.data, popts);

        rec.t_star = fit.projection.t_star;
        rec.n_clamped = fit.moment_diagnostics.n_clamped_entries;
        for (const auto& est : fit.path.estimates) {
            rec.n_nonconverged += !est.converged;
        }
        if (fit.path.estimates.size() >= 2) {
            rec.aupr = aupr(fit.path, sim.truth);
            rec.auc = auc(fit.path, sim.truth);
        }
        for (const auto& est : fit.path.estimates) {
            auto [tpr, tdr] = tpr_tdr(est, sim.truth);
            const double score = std::min(tpr, tdr.value_or(0.0));
            if (score > std::min(rec.best_tpr, rec.best_tdr)) {
                rec.best_tpr = tpr;
                rec.best_tdr = tdr.value_or(0.0);
            }
        }

        const PrecisionEstimate& chosen = fit.selected_estimate();
        auto [tpr, tdr] = tpr_tdr(chosen, sim.truth);
        rec.tpr = tpr;
        rec.tdr = tdr;
        rec.frobenius_risk = frobenius_risk(chosen, sim.truth);
        rec.lambda_bic = fit.selected_lambda();
        rec.n_edges_est = count_edges(chosen.theta);
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

}

std::vector<MetricsRecord> run_scenario(const ScenarioConfig& config, int jobs) {
    config.validate();
    std::vector<MetricsRecord> records(config.n_replicates);
    const int workers = std::max(1, std::min(jobs, config.n_replicates));
    if (workers == 1) {
        for (int r = 0; r < config.n_replicates; ++r) {
            records[r] = score_replicate(config, r);
        }
        return records;
    }

    std::atomic<int> next{ 0 };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int r = next++; r < config.n_replicates; r = next++) {
                records[r] = score_replicate(config, r);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    return records;
}

}
