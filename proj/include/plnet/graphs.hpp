#ifndef PLNET_GRAPHS_HPP
#define PLNET_GRAPHS_HPP

#include "types.hpp"

#include <cstdint>
#include <string>

namespace plnet {

enum class GraphFamily { banded, random, scalefree, blocked };

std::string to_string(GraphFamily family);

/// Throws `std::invalid_argument` for unknown names.
GraphFamily parse_graph_family(const std::string& name);

struct GraphSpec {
    GraphFamily family = GraphFamily::banded;
    int p = 100;
    std::uint64_t seed = 1;
    double edge_value = 0.3;
    /// banded only
    int band_width = 2;
    /// random and blocked
    double edge_prob = 0.1;
    /// random only: probability that an edge gets `-edge_value`
    double neg_prob = 0.2;
    /// blocked only
    int n_blocks = 5;

    void validate() const;
};

/**
 * Ground-truth precision matrix with unit diagonal and `edge_value` on the edges:
 *
 * - banded: `0 < |i - j| <= band_width`
 * - random: each pair independently with `edge_prob`, negative with `neg_prob`
 * - scalefree: linear preferential attachment, one edge per arriving node
 * - blocked: `n_blocks` equal blocks, within-block pairs with `edge_prob`
 *
 * followed by `make_pd`. Deterministic in `spec.seed`.
 */
TrueNetwork gen_graph(const GraphSpec& spec);

/// Diagonal margin added on top of `|lambda_min|` by `make_pd`.
inline constexpr double pd_margin = 0.1;

/**
 * Leaves the matrix alone if its smallest eigenvalue exceeds 0.05, otherwise
 * adds `(|lambda_min| + pd_margin) * I`.
 */
TrueNetwork make_pd(const Matrix& theta_raw);

}

#endif
