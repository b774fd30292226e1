#include "plnet/graphs.hpp"
#include "plnet/linalg.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace plnet {

std::string to_string(GraphFamily family) {
    switch (family) {
    case GraphFamily::banded:
        return "banded";
    case GraphFamily::random:
        return "random";
    case GraphFamily::scalefree:
        return "scalefree";
    case GraphFamily::blocked:
        return "blocked";
    }
    return "unknown";
}

GraphFamily parse_graph_family(const std::string& name) {
    if (name == "banded") {
        return GraphFamily::banded;
    } else if (name == "random") {
        return GraphFamily::random;
    } else if (name == "scalefree") {
        return GraphFamily::scalefree;
    } else if (name == "blocked") {
        return GraphFamily::blocked;
    }
    throw std::invalid_argument("unknown graph family '" + name + "'");
}

void GraphSpec::validate() const {
    if (p < 2) {
        throw std::invalid_argument("graph needs p >= 2");
    }
    if (family == GraphFamily::banded && band_width < 1) {
        throw std::invalid_argument("band width must be at least 1");
    }
    if ((family == GraphFamily::random || family == GraphFamily::blocked) && !(edge_prob > 0 && edge_prob < 1)) {
        throw std::invalid_argument("edge probability must lie in (0, 1)");
    }
    if (family == GraphFamily::random && !(neg_prob >= 0 && neg_prob <= 1)) {
        throw std::invalid_argument("negative-edge probability must lie in [0, 1]");
    }
    if (family == GraphFamily::blocked) {
        if (n_blocks < 1) {
            throw std::invalid_argument("need at least one block");
        }
        if (p % n_blocks != 0) {
            throw std::invalid_argument("p not divisible by blocks");
        }
    }
}

TrueNetwork gen_graph(const GraphSpec& spec) {
    spec.validate();
    const int p = spec.p;
    Matrix theta = Matrix::Identity(p, p);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto connect = [&](int i, int j, double value) {
        theta(i, j) = value;
        theta(j, i) = value;
    };

    switch (spec.family) {
    case GraphFamily::banded:
        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p && j - i <= spec.band_width; ++j) {
                connect(i, j, spec.edge_value);
            }
        }
        break;

    case GraphFamily::random:
        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p; ++j) {
                if (unif(rng) < spec.edge_prob) {
                    const bool negative = unif(rng) < spec.neg_prob;
                    connect(i, j, negative ? -spec.edge_value : spec.edge_value);
                }
            }
        }
        break;

    case GraphFamily::scalefree: {
        std::vector<int> degree(p, 0);
        connect(0, 1, spec.edge_value);
        degree[0] = degree[1] = 1;
        long total = 2;
        for (int node = 2; node < p; ++node) {
            std::uniform_int_distribution<long> pick(0, total - 1);
            long ticket = pick(rng);
            int target = 0;
            while (ticket >= degree[target]) {
                ticket -= degree[target];
                ++target;
            }
            connect(node, target, spec.edge_value);
            ++degree[node];
            ++degree[target];
            total += 2;
        }
        break;
    }

    case GraphFamily::blocked: {
        const int size = p / spec.n_blocks;
        for (int b = 0; b < spec.n_blocks; ++b) {
            for (int i = b * size; i < (b + 1) * size; ++i) {
                for (int j = i + 1; j < (b + 1) * size; ++j) {
                    if (unif(rng) < spec.edge_prob) {
                        connect(i, j, spec.edge_value);
                    }
                }
            }
        }
        break;
    }
    }

    return make_pd(theta);
}

TrueNetwork make_pd(const Matrix& theta_raw) {
    if (theta_raw.rows() != theta_raw.cols()) {
        throw std::invalid_argument("precision matrix must be square");
    }
    if (max_asymmetry(theta_raw) > 0) {
        throw std::invalid_argument("precision matrix must be symmetric");
    }
    Matrix theta = theta_raw;
    const double lmin = min_eigenvalue(theta);
    if (lmin <= 0.05) {
        theta.diagonal().array() += std::abs(lmin) + pd_margin;
    }
    return TrueNetwork::from_theta(std::move(theta));
}

}
