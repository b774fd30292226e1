#ifndef PLNET_DTRACE_HPP
#define PLNET_DTRACE_HPP

#include "types.hpp"

#include <optional>
#include <utility>
#include <vector>

/**
 * @file dtrace.hpp
 *
 * @brief Lasso-penalized D-trace estimation of a sparse precision matrix.
 *
 * The objective is `0.5 tr(T S T) - tr(T) + lambda * sum_{j != k} |T_jk|`
 * over `T >= eps_pd * I`, where `S` is a PSD covariance estimate.
 */

namespace plnet {

struct AdmmOptions {
    /// Augmented-Lagrangian penalty.
    double rho = 1.0;
    /// Lower eigenvalue bound of the cone constraint.
    double eps_pd = 1e-8;
    double tol_primal = 1e-6;
    double tol_dual = 1e-6;
    int max_iters = 10000;
    /**
     * Doubles or halves `rho` whenever the primal and dual residuals differ by
     * more than a factor of 10. Disable to get the fixed-penalty iteration.
     */
    bool adaptive_rho = true;

    /// Throws `std::invalid_argument` unless all tolerances and `rho` are positive and `max_iters >= 1`.
    void validate() const;
};

/**
 * Full iterate of the three-block splitting: `theta0` (quadratic block),
 * `theta1` (sparse block), `theta2` (cone block) and the two multipliers.
 */
struct AdmmState {
    Matrix theta1, theta2, dual1, dual2;
    double rho = 1.0;
};

struct FitDetail {
    PrecisionEstimate estimate;
    AdmmState state;
    /**
     * Per-iteration `rho |Z_k+1 - Z_k|^2 + |L_k+1 - L_k|^2 / rho` over the
     * splitting blocks `Z` and multipliers `L`; filled only when requested.
     */
    std::vector<double> residual_history;
};

/**
 * Holds the eigendecomposition of the covariance estimate so that every fit
 * along a penalty path reuses it.
 */
class DtraceSolver {
public:
    /// Throws `std::invalid_argument` if `sigma_hat` has an eigenvalue below `-1e-8` (relative to its scale).
    explicit DtraceSolver(const CovEstimate& sigma_hat);

    FitDetail fit(double lambda,
                  const AdmmOptions& opts,
                  const std::optional<AdmmState>& warm = std::nullopt,
                  bool record_history = false) const;

    const Matrix& sigma() const { return sigma_; }
    Eigen::Index dim() const { return sigma_.rows(); }

    /// Starting point of a cold fit: `diag(1 / S_jj)` with zero multipliers.
    AdmmState cold_start(double rho) const;

private:
    Matrix sigma_;
    Matrix basis_;
    Vector evals_;
};

/**
 * One ADMM fit. With a warm start only its `theta` is reused; multipliers start at zero.
 * A fit that hits `max_iters` is returned with `converged = false`.
 */
PrecisionEstimate dtrace_fit(const CovEstimate& sigma_hat,
                             double lambda,
                             const AdmmOptions& opts = {},
                             const std::optional<PrecisionEstimate>& warm_start = std::nullopt);

/**
 * Stationarity residual of the unconstrained problem. With
 * `R = 0.5 (S T + T S) - I`, it is the max over `|R_jj|`, over
 * `|R_jk + lambda sign(T_jk)|` on the support and over `max(0, |R_jk| - lambda)`
 * off the support. Meaningful as a certificate only when `T` is strictly inside the cone.
 */
double kkt_residual(const PrecisionEstimate& theta, const CovEstimate& sigma_hat, double lambda);

struct LambdaGrid {
    std::vector<double> values;
    /// Set when the largest useful penalty is zero (e.g. diagonal input); `values` are then all zero.
    bool degenerate = false;
};

/**
 * `k` log-spaced penalties from `lambda_max` down to `ratio * lambda_max`, where
 * `lambda_max = max_{j != k} |0.5 (S_jk / S_jj + S_jk / S_kk)|` is the smallest
 * penalty at which `diag(1 / S_jj)` satisfies the optimality conditions.
 */
LambdaGrid lambda_grid(const CovEstimate& sigma_hat, int k = 50, double ratio = 0.01);

/// `|0.5 (T S + S T) - I|_F + |T|_0 log(n) / n`; `|T|_0` counts entries above 1e-8 in magnitude, diagonal included.
double bic_score(const PrecisionEstimate& theta, const CovEstimate& sigma_hat, int n);

struct PathResult {
    std::vector<double> lambdas;
    std::vector<PrecisionEstimate> estimates;
    std::vector<double> bic_scores;
};

/// Fits a strictly decreasing grid with warm starts and scores each fit with `bic_score`.
PathResult fit_path(const CovEstimate& sigma_hat, const std::vector<double>& grid, const AdmmOptions& opts, int n);

/**
 * Entry with the lowest score; exact ties go to the larger penalty.
 * Throws `ConvergenceError` if no fit on the path converged.
 */
std::pair<double, PrecisionEstimate> select_bic(const PathResult& path);

/// Number of entries with magnitude above 1e-8 strictly above the diagonal.
int count_edges(const Matrix& theta);

}

#endif
