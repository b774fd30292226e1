#include "plnet/dtrace.hpp"
#include "plnet/linalg.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace plnet {

namespace {

constexpr double edge_threshold = 1e-8;

void soft_threshold_offdiag(Matrix& m, double cut) {
    const auto p = m.rows();
    for (Eigen::Index k = 0; k < p; ++k) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (j == k) {
                continue;
            }
            double& v = m(j, k);
            if (v > cut) {
                v -= cut;
            } else if (v < -cut) {
                v += cut;
            } else {
                v = 0;
            }
        }
    }
}

// Projection onto {A >= floor * I}; skips the eigensolver when a Cholesky
// factorization shows the matrix is already inside.
Matrix project_cone(const Matrix& m, double floor) {
    Matrix shifted = m;
    shifted.diagonal().array() -= floor;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
        return m;
    }
    return clip_eigenvalues(m, floor);
}

Matrix stationarity(const Matrix& sigma, const Matrix& theta) {
    Matrix st = sigma * theta;
    Matrix r = 0.5 * (st + st.transpose());
    r.diagonal().array() -= 1.0;
    return r;
}

}

void AdmmOptions::validate() const {
    if (!(rho > 0) || !(eps_pd >= 0) || !(tol_primal > 0) || !(tol_dual > 0) || max_iters < 1) {
        throw std::invalid_argument("ADMM options need rho > 0, eps_pd >= 0, positive tolerances and max_iters >= 1");
    }
}

DtraceSolver::DtraceSolver(const CovEstimate& sigma_hat) : sigma_(sigma_hat.matrix) {
    if (sigma_.rows() != sigma_.cols() || sigma_.rows() == 0) {
        throw std::invalid_argument("covariance estimate must be a non-empty square matrix");
    }
    if (max_asymmetry(sigma_) > 1e-10 * std::max(1.0, max_abs(sigma_))) {
        throw std::invalid_argument("covariance estimate is not symmetric");
    }
    symmetrize(sigma_);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_);
    evals_ = es.eigenvalues();
    basis_ = es.eigenvectors();
    const double scale = std::max(1.0, std::abs(evals_(evals_.size() - 1)));
    if (evals_(0) < -1e-8 * scale) {
        throw std::invalid_argument("covariance estimate is not positive semidefinite (smallest eigenvalue " +
                                    std::to_string(evals_(0)) + ")");
    }
}

AdmmState DtraceSolver::cold_start(double rho) const {
    const auto p = dim();
    AdmmState st;
    st.theta1 = Matrix::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        st.theta1(j, j) = sigma_(j, j) > 0 ? 1.0 / sigma_(j, j) : 1.0;
    }
    st.theta2 = st.theta1;
    st.dual1 = Matrix::Zero(p, p);
    st.dual2 = Matrix::Zero(p, p);
    st.rho = rho;
    return st;
}

FitDetail DtraceSolver::fit(double lambda,
                            const AdmmOptions& opts,
                            const std::optional<AdmmState>& warm,
                            bool record_history) const {
    opts.validate();
    if (!(lambda >= 0)) {
        throw std::invalid_argument("penalty must be nonnegative");
    }
    const auto p = dim();

    AdmmState st = warm ? *warm : cold_start(opts.rho);
    if (!opts.adaptive_rho || !(st.rho > 0)) {
        st.rho = opts.rho;
    }
    if (st.theta1.rows() != p || st.theta2.rows() != p || st.dual1.rows() != p || st.dual2.rows() != p) {
        throw std::invalid_argument("warm start has the wrong dimension");
    }

    double rho = st.rho;
    Matrix weights(p, p);
    auto refresh_weights = [&]() {
        for (Eigen::Index k = 0; k < p; ++k) {
            for (Eigen::Index j = 0; j < p; ++j) {
                weights(j, k) = 1.0 / (0.5 * (evals_(j) + evals_(k)) + 2.0 * rho);
            }
        }
    };
    refresh_weights();

    FitDetail detail;
    Matrix theta0(p, p), rhs(p, p), rotated(p, p);
    bool converged = false;
    int iter = 0;

    for (iter = 1; iter <= opts.max_iters; ++iter) {
        // Quadratic block: 0.5 (S T + T S) + 2 rho T = B, diagonalized by the eigenbasis of S.
        rhs = rho * (st.theta1 + st.theta2) - st.dual1 - st.dual2;
        rhs.diagonal().array() += 1.0;
        rotated.noalias() = basis_.transpose() * rhs * basis_;
        rotated.array() *= weights.array();
        theta0.noalias() = basis_ * rotated * basis_.transpose();
        symmetrize(theta0);

        Matrix next1 = theta0 + st.dual1 / rho;
        soft_threshold_offdiag(next1, lambda / rho);
        Matrix next2 = project_cone(theta0 + st.dual2 / rho, opts.eps_pd);

        const Matrix gap1 = theta0 - next1;
        const Matrix gap2 = theta0 - next2;
        const Matrix step1 = next1 - st.theta1;
        const Matrix step2 = next2 - st.theta2;
        st.dual1 += rho * gap1;
        st.dual2 += rho * gap2;

        if (record_history) {
            const double dz = step1.squaredNorm() + step2.squaredNorm();
            const double dl = rho * rho * (gap1.squaredNorm() + gap2.squaredNorm());
            detail.residual_history.push_back(rho * dz + dl / rho);
        }

        st.theta1 = std::move(next1);
        st.theta2 = std::move(next2);

        const double primal = std::max(max_abs(gap1), max_abs(gap2));
        const double dual = rho * std::max(max_abs(step1), max_abs(step2));
        if (primal < opts.tol_primal && dual < opts.tol_dual) {
            converged = true;
            break;
        }

        if (opts.adaptive_rho && iter % 10 == 0) {
            if (primal > 10 * dual) {
                rho *= 2;
                refresh_weights();
            } else if (dual > 10 * primal) {
                rho /= 2;
                refresh_weights();
            }
        }
    }

    st.rho = rho;
    PrecisionEstimate& est = detail.estimate;
    est.theta = st.theta1;
    est.lambda = lambda;
    est.converged = converged;
    est.iterations = std::min(iter, opts.max_iters);
    CovEstimate view;
    view.matrix = sigma_;
    est.kkt_residual = kkt_residual(est, view, lambda);
    detail.state = std::move(st);
    return detail;
}

PrecisionEstimate dtrace_fit(const CovEstimate& sigma_hat,
                             double lambda,
                             const AdmmOptions& opts,
                             const std::optional<PrecisionEstimate>& warm_start) {
    DtraceSolver solver(sigma_hat);
    std::optional<AdmmState> warm;
    if (warm_start) {
        if (warm_start->theta.rows() != solver.dim() || warm_start->theta.cols() != solver.dim()) {
            throw std::invalid_argument("warm start has the wrong dimension");
        }
        AdmmState st;
        st.theta1 = warm_start->theta;
        st.theta2 = project_cone(warm_start->theta, opts.eps_pd);
        st.dual1 = Matrix::Zero(solver.dim(), solver.dim());
        st.dual2 = st.dual1;
        st.rho = opts.rho;
        warm = std::move(st);
    }
    return solver.fit(lambda, opts, warm).estimate;
}

double kkt_residual(const PrecisionEstimate& theta, const CovEstimate& sigma_hat, double lambda) {
    const Matrix& t = theta.theta;
    const Matrix r = stationarity(sigma_hat.matrix, t);
    const auto p = t.rows();
    double worst = 0;
    for (Eigen::Index k = 0; k < p; ++k) {
        for (Eigen::Index j = 0; j < p; ++j) {
            double v;
            if (j == k) {
                v = std::abs(r(j, k));
            } else if (t(j, k) != 0) {
                v = std::abs(r(j, k) + lambda * (t(j, k) > 0 ? 1.0 : -1.0));
            } else {
                v = std::max(0.0, std::abs(r(j, k)) - lambda);
            }
            worst = std::max(worst, v);
        }
    }
    return worst;
}

LambdaGrid lambda_grid(const CovEstimate& sigma_hat, int k, double ratio) {
    if (k < 2) {
        throw std::invalid_argument("lambda grid needs at least two values");
    }
    if (!(ratio > 0) || !(ratio < 1)) {
        throw std::invalid_argument("lambda grid ratio must lie in (0, 1)");
    }
    const Matrix& s = sigma_hat.matrix;
    const auto p = s.rows();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (s(j, j) == 0) {
            throw std::invalid_argument("covariance estimate has a zero diagonal entry at index " + std::to_string(j));
        }
    }
    double lmax = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) {
            if (i != j) {
                lmax = std::max(lmax, std::abs(0.5 * (s(i, j) / s(i, i) + s(i, j) / s(j, j))));
            }
        }
    }

    LambdaGrid grid;
    grid.values.resize(k);
    if (lmax == 0) {
        grid.degenerate = true;
        std::fill(grid.values.begin(), grid.values.end(), 0.0);
        return grid;
    }
    const double log_hi = std::log(lmax);
    const double log_lo = std::log(ratio * lmax);
    for (int i = 0; i < k; ++i) {
        grid.values[i] = std::exp(log_hi + (log_lo - log_hi) * i / (k - 1));
    }
    grid.values.front() = lmax;
    grid.values.back() = ratio * lmax;
    return grid;
}

double bic_score(const PrecisionEstimate& theta, const CovEstimate& sigma_hat, int n) {
    if (n < 2) {
        throw std::invalid_argument("BIC needs n >= 2");
    }
    const Matrix& t = theta.theta;
    const Matrix r = stationarity(sigma_hat.matrix, t);
    const auto nnz = (t.array().abs() > edge_threshold).count();
    return r.norm() + static_cast<double>(nnz) * std::log(static_cast<double>(n)) / n;
}

PathResult fit_path(const CovEstimate& sigma_hat, const std::vector<double>& grid, const AdmmOptions& opts, int n) {
    if (grid.empty()) {
        throw std::invalid_argument("penalty grid is empty");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] < grid[i - 1])) {
            throw std::invalid_argument("penalty grid must be strictly decreasing");
        }
    }
    DtraceSolver solver(sigma_hat);
    PathResult path;
    std::optional<AdmmState> warm;
    for (double lambda : grid) {
        FitDetail detail = solver.fit(lambda, opts, warm);
        path.lambdas.push_back(lambda);
        path.bic_scores.push_back(bic_score(detail.estimate, sigma_hat, n));
        path.estimates.push_back(std::move(detail.estimate));
        warm = std::move(detail.state);
    }
    return path;
}

std::pair<double, PrecisionEstimate> select_bic(const PathResult& path) {
    if (path.estimates.empty() || path.estimates.size() != path.bic_scores.size() ||
        path.estimates.size() != path.lambdas.size()) {
        throw std::invalid_argument("path is empty or inconsistent");
    }
    bool any_converged = false;
    std::size_t best = 0;
    for (std::size_t i = 0; i < path.estimates.size(); ++i) {
        any_converged = any_converged || path.estimates[i].converged;
        if (path.bic_scores[i] < path.bic_scores[best]) {
            best = i;
        }
    }
    if (!any_converged) {
        throw ConvergenceError("no fit on the penalty path converged");
    }
    return { path.lambdas[best], path.estimates[best] };
}

int count_edges(const Matrix& theta) {
    int edges = 0;
    for (Eigen::Index k = 0; k < theta.cols(); ++k) {
        for (Eigen::Index j = 0; j < k; ++j) {
            edges += std::abs(theta(j, k)) > edge_threshold;
        }
    }
    return edges;
}

}
