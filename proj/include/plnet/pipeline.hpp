#ifndef PLNET_PIPELINE_HPP
#define PLNET_PIPELINE_HPP

#include "dtrace.hpp"
#include "moment.hpp"
#include "projection.hpp"
#include "types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace plnet {

struct PipelineOptions {
    /// `shifted` plugs the shifted estimate into the solver, `projected` the unshifted one.
    CovStage estimator = CovStage::shifted;
    int grid_size = 50;
    double grid_ratio = 0.01;
    /// Fit a single penalty instead of a BIC-selected path.
    std::optional<double> fixed_lambda;
    AdmmOptions admm;
    ProjectionMethod projection = ProjectionMethod::splitting;
    double projection_tol = 1e-6;
};

/**
 * Every intermediate of one estimation run, from raw moments to the selected
 * precision matrix.
 */
struct PipelineResult {
    CovEstimate raw;
    MomentDiagnostics moment_diagnostics;
    CovEstimate projected;
    ProjectionReport projection;
    /// The covariance actually handed to the solver.
    CovEstimate solver_input;
    LambdaGrid grid;
    PathResult path;
    std::size_t selected = 0;
    std::map<std::string, long long> timings_ms;
    std::vector<std::string> warnings;

    const PrecisionEstimate& selected_estimate() const { return path.estimates.at(selected); }
    double selected_lambda() const { return path.lambdas.at(selected); }
};

/**
 * Moment estimate, PSD repair, optional shift, then either a single fit or a
 * penalty path with BIC selection. A degenerate grid falls back to a single
 * fit at zero penalty. Warnings are recorded for clamped moments, for a
 * projection whose certified gap stayed above its tolerance, and for
 * non-converged fits.
 */
PipelineResult run_pipeline(const CountMatrix& data, const PipelineOptions& opts);

}

#endif
