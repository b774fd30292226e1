#ifndef PLNET_TYPES_HPP
#define PLNET_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/**
 * @file types.hpp
 *
 * @brief Domain types shared by every stage of the network-inference pipeline.
 */

namespace plnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
 * Raised when user-supplied data cannot be processed (all-zero genes or cells,
 * malformed files, dimension mismatches). The CLI maps it to exit code 2.
 */
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Raised when no usable numerical output exists. The CLI maps it to exit code 3.
 */
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Observed counts, cells in rows and genes in columns, with one library size per cell.
 * Counts are held as doubles but are validated to be nonnegative integers.
 */
struct CountMatrix {
    Matrix counts;
    Vector lib_sizes;
    std::vector<std::string> gene_names;
    std::vector<std::string> cell_ids;

    Eigen::Index n_cells() const { return counts.rows(); }
    Eigen::Index n_genes() const { return counts.cols(); }

    /**
     * Checks integrality, nonnegativity, strictly positive library sizes and
     * that the optional name lists match the matrix dimensions.
     * Throws `InputError` on the first violation.
     */
    void validate() const;
};

/**
 * Parameters of the latent Gaussian layer: `log(X) ~ N(mu, sigma)`.
 */
struct LatentParams {
    Vector mu;
    Matrix sigma;
};

enum class CovStage { raw, projected, shifted };

std::string to_string(CovStage stage);

/**
 * Covariance estimate tagged with the pipeline stage that produced it.
 * `inf_gap` is the element-wise max distance between the projected and raw
 * estimates and is zero for the raw stage.
 */
struct CovEstimate {
    Matrix matrix;
    CovStage stage = CovStage::raw;
    double inf_gap = 0;
};

struct PrecisionEstimate {
    Matrix theta;
    double lambda = 0;
    bool converged = false;
    int iterations = 0;
    double kkt_residual = 0;
};

/**
 * Ground-truth precision matrix and its off-diagonal support (pairs with `i < j`).
 */
struct TrueNetwork {
    Matrix theta;
    std::vector<std::pair<int, int> > support;

    /// Support is recomputed from `theta`.
    static TrueNetwork from_theta(Matrix theta);
};

}

#endif
