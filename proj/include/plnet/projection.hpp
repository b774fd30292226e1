#ifndef PLNET_PROJECTION_HPP
#define PLNET_PROJECTION_HPP

#include "types.hpp"

#include <utility>

namespace plnet {

struct ProjectionReport {
    /// Achieved element-wise max distance between the projected and raw matrices.
    double t_star = 0;
    int bisection_iters = 0;
    int inner_iters_total = 0;
    /// `t_star` minus the best certified lower bound on the optimal distance.
    double certificate_gap = 0;
};

enum class ProjectionMethod {
    /// ADMM on the whole problem, stopped once the certified gap is below `tol_t`.
    splitting,
    /// Bisection on `t` with a Dykstra feasibility test per candidate.
    bisection,
};

/**
 * Nearest positive semidefinite matrix to `raw.matrix` in the element-wise max norm.
 *
 * Both methods keep a bracket `[lower, upper]` on the optimal distance. The upper
 * end is always the exact distance of a PSD matrix that was actually produced by
 * eigenvalue clipping; the lower end is certified by a PSD direction `N` through
 * `t* >= -<N, raw> / |N|_1`. The search starts from the Frobenius projection,
 * which is never further than the diagonal repair `raw + |lambda_min| I`.
 *
 * - `splitting`: ADMM on `min |E|_max s.t. A - E = raw, A PSD` with residual
 *   balancing, at most `10 * max_inner` iterations. `tol_inner` is unused.
 * - `bisection`: for each candidate `t`, Dykstra's alternating projections between
 *   the PSD cone and the box `|A - raw| <= t` either reach a PSD point within
 *   `t + tol_inner` or certify infeasibility; runs that do neither within
 *   `max_inner` sweeps count as infeasible.
 *
 * The returned matrix is the best PSD point found and `t_star` its distance.
 * PSD input is returned unchanged with `t_star = 0`.
 *
 * Throws `std::invalid_argument` for a non-symmetric or non-raw input.
 */
std::pair<CovEstimate, ProjectionReport> project_psd_inf(const CovEstimate& raw,
                                                         double tol_t = 1e-6,
                                                         double tol_inner = 1e-8,
                                                         int max_inner = 5000,
                                                         ProjectionMethod method = ProjectionMethod::splitting);

/// Adds `report.t_star` to the diagonal of the projected estimate.
CovEstimate shift_cov(const CovEstimate& projected, const ProjectionReport& report);

/**
 * Lower bound on the optimal projection distance from the eigenvectors of `m`
 * with negative eigenvalues: `max_v (-v'mv) / |v|_1^2`. Zero for PSD input.
 */
double projection_lower_bound(const Matrix& m);

}

#endif
