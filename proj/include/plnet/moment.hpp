#ifndef PLNET_MOMENT_HPP
#define PLNET_MOMENT_HPP

#include "types.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace plnet {

/**
 * Bookkeeping for empirical moments that were not positive before taking logs.
 * Diagonal entries appear as `(j, j)`; off-diagonal pairs are listed once with `j < k`.
 */
struct MomentDiagnostics {
    int n_clamped_entries = 0;
    std::vector<std::pair<int, int> > clamped_pairs;
    double floor_value = 1e-12;
};

/**
 * Single-pass accumulator of the three scaled sums the moment estimator needs:
 * `sum Y/S`, `sum Y(Y-1)/S^2` and `sum Y^T Y / S^2`.
 *
 * Rows are processed in fixed-size blocks whose partial sums are merged with
 * compensated addition, so accuracy does not degrade with the number of cells.
 * Accumulators over disjoint row sets can be merged in any order.
 */
class MomentAccumulator {
public:
    MomentAccumulator() = default;
    explicit MomentAccumulator(Eigen::Index p);

    /// Adds every row of `block`. Throws `InputError` if the gene count differs from earlier blocks.
    void add(const CountMatrix& block);

    void merge(const MomentAccumulator& other);

    Eigen::Index n_genes() const { return p_; }
    Eigen::Index n_cells() const { return n_; }

    /// Builds the raw covariance estimate from the sums collected so far.
    std::pair<CovEstimate, MomentDiagnostics> finish() const;

private:
    void add_partial(const Vector& first, const Vector& factorial, const Matrix& cross);

    Eigen::Index p_ = -1;
    Eigen::Index n_ = 0;
    Vector first_, first_c_;
    Vector factorial_, factorial_c_;
    Matrix cross_, cross_c_;
};

/**
 * Raw moment estimator of the latent covariance.
 *
 * With `a_j = mean_i(Y_ij / S_i)`, the diagonal is
 * `log(mean_i(Y_ij (Y_ij - 1) / S_i^2)) - 2 log(a_j)` and the off-diagonal is
 * `log(mean_i(Y_ij Y_ik / S_i^2)) - log(a_j) - log(a_k)`. Log arguments at or
 * below 1e-12 are clamped to 1e-12 and reported.
 *
 * Throws `InputError` listing every gene with no counts, or when fewer than two cells are given.
 */
std::pair<CovEstimate, MomentDiagnostics> moment_cov(const CountMatrix& data);

/// Pulls the next block of rows, or `std::nullopt` at the end.
using ChunkSource = std::function<std::optional<CountMatrix>()>;

/// Same estimate as `moment_cov` over the concatenation of all chunks.
std::pair<CovEstimate, MomentDiagnostics> moment_cov_stream(const ChunkSource& next_chunk);

}

#endif
