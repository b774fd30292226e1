#include "plnet/pipeline.hpp"
#include "plnet/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace plnet;

namespace {

ScenarioConfig small_config() {
    ScenarioConfig c;
    c.graph.family = GraphFamily::banded;
    c.graph.p = 10;
    c.n = 600;
    c.lambda_grid_size = 15;
    c.n_replicates = 3;
    c.master_seed = 4;
    return c;
}

bool same_record(const MetricsRecord& a, const MetricsRecord& b) {
    return a.replicate == b.replicate && a.replicate_seed == b.replicate_seed && a.ok == b.ok && a.aupr == b.aupr &&
           a.auc == b.auc && a.tpr == b.tpr && a.tdr == b.tdr && a.frobenius_risk == b.frobenius_risk &&
           a.lambda_bic == b.lambda_bic && a.n_edges_est == b.n_edges_est && a.zero_fraction == b.zero_fraction &&
           a.t_star == b.t_star;
}

}

TEST(DeriveSeed, DeterministicAndDistinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 1000; ++r) {
        EXPECT_EQ(derive_seed(9, r), derive_seed(9, r));
        seen.insert(derive_seed(9, r));
    }
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(ZeroFraction, CountsZeros) {
    Matrix y(2, 2);
    y << 0, 1, 0, 0;
    EXPECT_DOUBLE_EQ(zero_fraction(y), 0.75);
}

TEST(SimulateReplicate, SharedGraphUnlessRegenerated) {
    ScenarioConfig c = small_config();
    c.graph.family = GraphFamily::random;
    const SimulatedData a = simulate_replicate(c, 0);
    const SimulatedData b = simulate_replicate(c, 1);
    EXPECT_TRUE(a.truth.theta == b.truth.theta);
    EXPECT_FALSE(a.data.counts == b.data.counts);
    c.regenerate_graph = true;
    EXPECT_FALSE(simulate_replicate(c, 0).truth.theta == simulate_replicate(c, 1).truth.theta);
}

TEST(SimulateReplicate, LibrarySizesAreLogNormalAroundTen) {
    ScenarioConfig c = small_config();
    c.n = 20000;
    const SimulatedData d = simulate_replicate(c, 0);
    const Eigen::ArrayXd logs = d.data.lib_sizes.array().log();
    EXPECT_NEAR(logs.mean(), std::log(10.0), 4 * 0.1 / std::sqrt(20000.0));
    const double sd = std::sqrt((logs - logs.mean()).square().sum() / (c.n - 1));
    EXPECT_NEAR(sd, 0.1, 0.005);
}

TEST(RunScenario, OneRecordPerReplicateAndDeterministic) {
    ScenarioConfig c = small_config();
    c.n_replicates = 1;
    const auto a = run_scenario(c);
    const auto b = run_scenario(c);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_TRUE(a[0].ok) << a[0].error;
    EXPECT_TRUE(same_record(a[0], b[0]));
    EXPECT_GE(a[0].aupr, 0.0);
    EXPECT_LE(a[0].aupr, 1.0);
}

TEST(RunScenario, ThreadCountDoesNotChangeResults) {
    const ScenarioConfig c = small_config();
    const auto serial = run_scenario(c, 1);
    const auto parallel = run_scenario(c, 3);
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t r = 0; r < serial.size(); ++r) {
        EXPECT_EQ(serial[r].replicate, static_cast<int>(r));
        EXPECT_TRUE(same_record(serial[r], parallel[r])) << r;
    }
}

TEST(RunScenario, FailedReplicateIsRecorded) {
    ScenarioConfig c = small_config();
    c.mu_level = -30;
    c.n_replicates = 2;
    const auto recs = run_scenario(c);
    ASSERT_EQ(recs.size(), 2u);
    for (const auto& r : recs) {
        EXPECT_FALSE(r.ok);
        EXPECT_FALSE(r.error.empty());
    }
}

TEST(ScenarioConfig, Validation) {
    ScenarioConfig c = small_config();
    c.libsize_sd = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config();
    c.n = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config();
    c.estimator = CovStage::raw;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(RunPipeline, ProjectedAndShiftedInputsDifferByTheGap) {
    ScenarioConfig c = small_config();
    c.mu_level = -2.8;
    SimulatedData sim = simulate_replicate(c, 0);
    PipelineOptions opts;
    opts.grid_size = 5;
    const PipelineResult shifted = run_pipeline(sim.data, opts);
    opts.estimator = CovStage::projected;
    const PipelineResult projected = run_pipeline(sim.data, opts);
    const double t = shifted.projection.t_star;
    EXPECT_GT(t, 0.0);
    const Matrix diff = shifted.solver_input.matrix - projected.solver_input.matrix;
    EXPECT_TRUE(diff.isDiagonal(0.0));
    EXPECT_LT((diff.diagonal().array() - t).abs().maxCoeff(), 1e-15);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(projected.solver_input.matrix).eigenvalues()(0), -1e-8);
}

TEST(RunPipeline, FixedPenaltyAndDegenerateGrid) {
    CountMatrix data;
    data.counts.resize(4, 2);
    data.counts << 1, 2, 2, 4, 3, 6, 4, 8;
    data.lib_sizes = Vector::Ones(4);
    PipelineOptions opts;
    opts.fixed_lambda = 0.2;
    const PipelineResult res = run_pipeline(data, opts);
    ASSERT_EQ(res.path.lambdas.size(), 1u);
    EXPECT_EQ(res.selected_lambda(), 0.2);
    EXPECT_TRUE(res.timings_ms.count("moment") && res.timings_ms.count("projection") && res.timings_ms.count("solver"));
}
