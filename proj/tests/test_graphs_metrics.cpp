#include "oracles.hpp"
#include "plnet/graphs.hpp"
#include "plnet/linalg.hpp"
#include "plnet/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace plnet;

namespace {

GraphSpec spec_of(GraphFamily f, int p, std::uint64_t seed) {
    GraphSpec s;
    s.family = f;
    s.p = p;
    s.seed = seed;
    return s;
}

Matrix with_edges(int p, const std::vector<std::pair<int, int> >& edges, double value = 0.3) {
    Matrix t = Matrix::Identity(p, p);
    for (auto [i, j] : edges) {
        t(i, j) = t(j, i) = value;
    }
    return t;
}

PrecisionEstimate est_of(const Matrix& t) {
    PrecisionEstimate e;
    e.theta = t;
    return e;
}

PathResult path_of(const std::vector<Matrix>& fits) {
    PathResult path;
    double lambda = 1.0;
    for (const auto& f : fits) {
        path.lambdas.push_back(lambda);
        path.estimates.push_back(est_of(f));
        path.bic_scores.push_back(0);
        lambda /= 2;
    }
    return path;
}

Matrix permute(const Matrix& m, const std::vector<int>& perm) {
    const int p = static_cast<int>(m.rows());
    Matrix out(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            out(perm[i], perm[j]) = m(i, j);
        }
    }
    return out;
}

}

TEST(GenGraph, BandedSupport) {
    const TrueNetwork net = gen_graph(spec_of(GraphFamily::banded, 5, 1));
    using PairSet = std::set<std::pair<int, int> >;
    const PairSet expected = { { 0, 1 }, { 1, 2 }, { 2, 3 }, { 3, 4 }, { 0, 2 }, { 1, 3 }, { 2, 4 } };
    EXPECT_EQ(PairSet(net.support.begin(), net.support.end()), expected);
    for (auto [i, j] : net.support) {
        EXPECT_EQ(net.theta(i, j), 0.3);
    }
}

TEST(GenGraph, RandomEdgeCountAndSigns) {
    long negative = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const TrueNetwork net = gen_graph(spec_of(GraphFamily::random, 50, seed));
        EXPECT_GE(net.support.size(), 80u) << seed;
        EXPECT_LE(net.support.size(), 170u) << seed;
        for (auto [i, j] : net.support) {
            EXPECT_EQ(std::abs(net.theta(i, j)), 0.3);
            negative += net.theta(i, j) < 0;
        }
        total += static_cast<long>(net.support.size());
    }
    const double frac = static_cast<double>(negative) / static_cast<double>(total);
    EXPECT_NEAR(frac, 0.2, 4 * std::sqrt(0.16 / total));
}

TEST(GenGraph, BlockedHasNoCrossBlockEdges) {
    GraphSpec s = spec_of(GraphFamily::blocked, 10, 3);
    s.n_blocks = 5;
    s.edge_prob = 0.9;
    const TrueNetwork net = gen_graph(s);
    EXPECT_FALSE(net.support.empty());
    for (auto [i, j] : net.support) {
        EXPECT_EQ(i / 2, j / 2);
    }
}

TEST(GenGraph, BlockedNeedsDivisibleP) {
    GraphSpec s = spec_of(GraphFamily::blocked, 10, 3);
    s.n_blocks = 3;
    try {
        gen_graph(s);
        FAIL() << "expected an error";
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "p not divisible by blocks");
    }
}

TEST(GenGraph, ScaleFreeIsATreeWithHubs) {
    const TrueNetwork net = gen_graph(spec_of(GraphFamily::scalefree, 200, 9));
    ASSERT_EQ(net.support.size(), 199u);
    std::vector<int> parent(200);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::vector<int> degree(200, 0);
    for (auto [i, j] : net.support) {
        parent[find(i)] = find(j);
        ++degree[i];
        ++degree[j];
    }
    for (int v = 0; v < 200; ++v) {
        EXPECT_EQ(find(v), find(0));
    }
    EXPECT_GE(*std::max_element(degree.begin(), degree.end()), 10);
}

TEST(GenGraph, InvariantsAcrossFamiliesAndSizes) {
    for (auto f : { GraphFamily::banded, GraphFamily::random, GraphFamily::scalefree, GraphFamily::blocked }) {
        for (int p : { 10, 50, 300 }) {
            const GraphSpec s = spec_of(f, p, 77);
            const TrueNetwork a = gen_graph(s);
            const TrueNetwork b = gen_graph(s);
            EXPECT_TRUE(a.theta == b.theta) << to_string(f) << " " << p;
            EXPECT_EQ(a.support, TrueNetwork::from_theta(a.theta).support);
            EXPECT_EQ(max_asymmetry(a.theta), 0.0);
            EXPECT_GT(min_eigenvalue(a.theta), 0.05);
        }
    }
}

TEST(GenGraph, FamilyNames) {
    for (auto f : { GraphFamily::banded, GraphFamily::random, GraphFamily::scalefree, GraphFamily::blocked }) {
        EXPECT_EQ(parse_graph_family(to_string(f)), f);
    }
    EXPECT_THROW(parse_graph_family("lattice"), std::invalid_argument);
}

TEST(MakePd, WellConditionedInputIsUnchanged) {
    Matrix t(2, 2);
    t << 1, 0.6, 0.6, 1;
    EXPECT_NEAR(min_eigenvalue(t), 0.4, 1e-15);
    EXPECT_TRUE(make_pd(t).theta == t);
    EXPECT_TRUE(make_pd(Matrix::Identity(4, 4)).theta == Matrix::Identity(4, 4));
}

TEST(MakePd, IndefiniteChainIsRepaired) {
    Matrix raw = Matrix::Identity(100, 100);
    for (int i = 0; i + 1 < 100; ++i) {
        raw(i, i + 1) = raw(i + 1, i) = 0.6;
    }
    const double before = min_eigenvalue(raw);
    // Chain spectrum 1 + 1.2 cos(k pi / 101).
    EXPECT_NEAR(before, 1 + 1.2 * std::cos(100 * M_PI / 101), 1e-10);
    const TrueNetwork net = make_pd(raw);
    EXPECT_GE(min_eigenvalue(net.theta), 0.0999);
    EXPECT_TRUE((net.theta - raw).isDiagonal(0.0));
    EXPECT_NEAR(net.theta(0, 0) - 1, std::abs(before) + pd_margin, 1e-12);
    EXPECT_EQ(net.support, TrueNetwork::from_theta(raw).support);
}

TEST(MakePd, RejectsAsymmetricInput) {
    Matrix t = Matrix::Identity(2, 2);
    t(0, 1) = 0.1;
    EXPECT_THROW(make_pd(t), std::invalid_argument);
}

TEST(Aupr, HandcraftedTwoPointPath) {
    // Truth: 3 edges on p = 4. Fit 1 finds one true edge; fit 2 finds all three plus three false ones.
    const Matrix truth = with_edges(4, { { 0, 1 }, { 1, 2 }, { 2, 3 } });
    const Matrix fit1 = with_edges(4, { { 0, 1 } });
    const Matrix fit2 = with_edges(4, { { 0, 1 }, { 1, 2 }, { 2, 3 }, { 0, 2 }, { 0, 3 }, { 1, 3 } });
    const TrueNetwork net = TrueNetwork::from_theta(truth);
    const double expected = oracle::trapezoid({ { 0.0, 1.0 }, { 1.0 / 3, 1.0 }, { 1.0, 0.5 } });
    EXPECT_NEAR(expected, 5.0 / 6, 1e-15);
    EXPECT_NEAR(aupr(path_of({ fit1, fit2 }), net), expected, 1e-12);
    EXPECT_NEAR(aupr(path_of({ fit1, fit2 }), net), 0.8333, 1e-4);
}

TEST(Aupr, PerfectAndEmptyPaths) {
    const Matrix truth = with_edges(5, { { 0, 1 }, { 3, 4 } });
    const TrueNetwork net = TrueNetwork::from_theta(truth);
    EXPECT_DOUBLE_EQ(aupr(path_of({ truth, truth }), net), 1.0);
    EXPECT_DOUBLE_EQ(aupr(path_of({ Matrix::Identity(5, 5), Matrix::Identity(5, 5) }), net), 0.0);
    EXPECT_DOUBLE_EQ(auc(path_of({ truth, truth }), net), 1.0);
    EXPECT_DOUBLE_EQ(auc(path_of({ Matrix::Identity(5, 5), Matrix::Identity(5, 5) }), net), 0.5);
}

TEST(Auc, HandcraftedOnePointPath) {
    // p = 6: 5 true pairs, 10 null pairs. The fit has 4 true and 1 false edge: TPR 0.8, FPR 0.1.
    const Matrix truth6 = with_edges(6, { { 0, 1 }, { 0, 2 }, { 0, 3 }, { 0, 4 }, { 0, 5 } });
    const Matrix fit6 = with_edges(6, { { 0, 1 }, { 0, 2 }, { 0, 3 }, { 0, 4 }, { 1, 2 } });
    const TrueNetwork net = TrueNetwork::from_theta(truth6);
    const EdgeConfusion c = edge_confusion(fit6, net);
    ASSERT_EQ(c.tp, 4);
    ASSERT_EQ(c.fp, 1);
    ASSERT_EQ(c.fn, 1);
    ASSERT_EQ(c.tn, 9);
    const double expected = oracle::trapezoid({ { 0.0, 0.0 }, { 0.1, 0.8 }, { 1.0, 1.0 } });
    EXPECT_NEAR(expected, 0.85, 1e-15);
    EXPECT_NEAR(auc(path_of({ fit6 }), net), expected, 1e-12);
}

TEST(Metrics, PermutationInvariance) {
    std::mt19937_64 rng(5);
    const TrueNetwork net = gen_graph(spec_of(GraphFamily::random, 12, 8));
    std::vector<Matrix> fits;
    for (int k = 0; k < 4; ++k) {
        Matrix f = net.theta;
        std::bernoulli_distribution flip(0.15 * (k + 1));
        for (int i = 0; i < 12; ++i) {
            for (int j = i + 1; j < 12; ++j) {
                if (flip(rng)) {
                    f(i, j) = f(j, i) = f(i, j) == 0 ? 0.1 : 0.0;
                }
            }
        }
        fits.push_back(f);
    }
    const double a0 = aupr(path_of(fits), net);
    const double u0 = auc(path_of(fits), net);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<int> perm(12);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Matrix> pf;
        for (const auto& f : fits) {
            pf.push_back(permute(f, perm));
        }
        const TrueNetwork pnet = TrueNetwork::from_theta(permute(net.theta, perm));
        EXPECT_NEAR(aupr(path_of(pf), pnet), a0, 1e-12);
        EXPECT_NEAR(auc(path_of(pf), pnet), u0, 1e-12);
    }
}

TEST(Metrics, PathContainingTruthScoresHigher) {
    const Matrix truth = with_edges(6, { { 0, 1 }, { 1, 2 }, { 3, 4 } });
    const TrueNetwork net = TrueNetwork::from_theta(truth);
    const Matrix sub = with_edges(6, { { 0, 1 } });
    const Matrix super = with_edges(6, { { 0, 1 }, { 1, 2 }, { 3, 4 }, { 4, 5 }, { 0, 5 } });
    const Matrix off1 = with_edges(6, { { 0, 1 }, { 2, 5 } });
    const Matrix off2 = with_edges(6, { { 0, 1 }, { 2, 5 }, { 1, 2 }, { 0, 4 }, { 1, 5 } });
    const double with_truth = aupr(path_of({ sub, truth, super }), net);
    const double without = aupr(path_of({ sub, off1, off2 }), net);
    EXPECT_GT(with_truth, without);
    for (double v : { with_truth, without, auc(path_of({ sub, truth, super }), net) }) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Metrics, EmptyTruthIsRejected) {
    const TrueNetwork net = TrueNetwork::from_theta(Matrix::Identity(3, 3));
    EXPECT_THROW(aupr(path_of({ Matrix::Identity(3, 3) }), net), std::invalid_argument);
    EXPECT_THROW(auc(path_of({ Matrix::Identity(3, 3) }), net), std::invalid_argument);
}

TEST(TprTdr, Cases) {
    const Matrix truth = with_edges(4, { { 0, 1 }, { 0, 2 } });
    const TrueNetwork net = TrueNetwork::from_theta(truth);
    auto [t1, d1] = tpr_tdr(est_of(truth), net);
    EXPECT_EQ(t1, 1.0);
    ASSERT_TRUE(d1);
    EXPECT_EQ(*d1, 1.0);
    auto [t2, d2] = tpr_tdr(est_of(Matrix::Identity(4, 4)), net);
    EXPECT_EQ(t2, 0.0);
    EXPECT_FALSE(d2);
    auto [t3, d3] = tpr_tdr(est_of(with_edges(4, { { 0, 1 }, { 0, 3 } })), net);
    EXPECT_EQ(t3, 0.5);
    EXPECT_EQ(*d3, 0.5);
}

TEST(FrobeniusRisk, Cases) {
    const TrueNetwork eye = TrueNetwork::from_theta(Matrix::Identity(4, 4));
    EXPECT_EQ(frobenius_risk(est_of(Matrix::Identity(4, 4)), eye), 0.0);
    EXPECT_DOUBLE_EQ(frobenius_risk(est_of(Matrix::Zero(4, 4)), eye), 2.0);
    EXPECT_NEAR(frobenius_risk(est_of(with_edges(4, { { 1, 3 } })), eye), 0.42426, 5e-6);
    EXPECT_NEAR(frobenius_risk(est_of(with_edges(4, { { 1, 3 } })), eye), 0.3 * std::sqrt(2.0), 1e-15);
}

TEST(PartialCorr, Cases) {
    EXPECT_TRUE(partial_corr(est_of(Eigen::Vector3d(1, 2, 3).asDiagonal())) == Matrix::Identity(3, 3));
    Matrix a(2, 2);
    a << 1, -0.5, -0.5, 1;
    EXPECT_DOUBLE_EQ(partial_corr(est_of(a))(0, 1), 0.5);
    Matrix b(2, 2);
    b << 4, 1, 1, 1;
    EXPECT_DOUBLE_EQ(partial_corr(est_of(b))(0, 1), -0.5);
    EXPECT_DOUBLE_EQ(partial_corr(est_of(b))(1, 0), -0.5);
    Matrix c = Matrix::Identity(2, 2);
    c(1, 1) = 0;
    EXPECT_THROW(partial_corr(est_of(c)), std::invalid_argument);
}
