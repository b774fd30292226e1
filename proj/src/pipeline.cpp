#include "plnet/pipeline.hpp"

#include <chrono>

namespace plnet {

namespace {

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}

    long long lap() {
        const auto now = std::chrono::steady_clock::now();
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - start_).count();
        start_ = now;
        return ms;
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}

PipelineResult run_pipeline(const CountMatrix& data, const PipelineOptions& opts) {
    if (opts.estimator == CovStage::raw) {
        throw std::invalid_argument("the solver needs a projected or shifted covariance estimate");
    }
    PipelineResult res;
    StageTimer timer;

    auto [raw, diag] = moment_cov(data);
    res.raw = std::move(raw);
    res.moment_diagnostics = std::move(diag);
    if (res.moment_diagnostics.n_clamped_entries > 0) {
        res.warnings.push_back(std::to_string(res.moment_diagnostics.n_clamped_entries) +
                               " moment entries clamped before the log");
    }
    res.timings_ms["moment"] = timer.lap();

    auto [projected, report] = project_psd_inf(res.raw, opts.projection_tol, 1e-8, 5000, opts.projection);
    if (report.certificate_gap > opts.projection_tol) {
        res.warnings.push_back("projection certificate gap " + std::to_string(report.certificate_gap) +
                               " above tolerance");
    }
    res.projected = std::move(projected);
    res.projection = report;
    res.solver_input = opts.estimator == CovStage::shifted ? shift_cov(res.projected, report) : res.projected;
    res.timings_ms["projection"] = timer.lap();

    std::vector<double> lambdas;
    if (opts.fixed_lambda) {
        lambdas.push_back(*opts.fixed_lambda);
    } else {
        res.grid = lambda_grid(res.solver_input, opts.grid_size, opts.grid_ratio);
        if (res.grid.degenerate) {
            res.warnings.push_back("degenerate penalty grid (largest useful penalty is 0); fitted lambda = 0 only");
            lambdas.push_back(0.0);
        } else {
            lambdas = res.grid.values;
        }
    }
    res.path = fit_path(res.solver_input, lambdas, opts.admm, static_cast<int>(data.n_cells()));
    res.timings_ms["solver"] = timer.lap();

    for (std::size_t i = 0; i < res.path.estimates.size(); ++i) {
        if (!res.path.estimates[i].converged) {
            res.warnings.push_back("fit at lambda index " + std::to_string(i) + " did not converge");
        }
    }
    const double chosen = select_bic(res.path).first;
    for (std::size_t i = 0; i < res.path.lambdas.size(); ++i) {
        if (res.path.lambdas[i] == chosen) {
            res.selected = i;
            break;
        }
    }
    if (!res.selected_estimate().converged) {
        res.warnings.push_back("BIC-selected fit did not converge");
    }
    return res;
}

}
