#include "plnet/projection.hpp"
#include "plnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace plnet {

namespace {

// Best lower bound on the projection distance implied by PSD directions built
// from the negative eigenpairs of a symmetric matrix: each negative eigenvector
// separately, and the whole negative part at once.
double certified_bound(const Matrix& raw, const Vector& evals, const Matrix& evecs) {
    double best = 0;
    Eigen::Index n_neg = 0;
    while (n_neg < evals.size() && evals(n_neg) < 0) {
        ++n_neg;
    }
    if (n_neg == 0) {
        return 0;
    }
    for (Eigen::Index k = 0; k < n_neg; ++k) {
        const auto v = evecs.col(k);
        const double l1 = v.lpNorm<1>();
        const double bound = -(v.dot(raw * v)) / (l1 * l1);
        best = std::max(best, bound);
    }
    if (n_neg > 1) {
        const auto vneg = evecs.leftCols(n_neg);
        const Matrix dir = vneg * (-evals.head(n_neg)).asDiagonal() * vneg.transpose();
        const double l1 = dir.cwiseAbs().sum();
        if (l1 > 0) {
            best = std::max(best, -(dir.cwiseProduct(raw).sum()) / l1);
        }
    }
    return best;
}

// Lower bound -<N, raw> / |N|_1 certified by any PSD direction N.
double direction_bound(const Matrix& raw, const Matrix& dir) {
    const double l1 = dir.cwiseAbs().sum();
    return l1 > 0 ? -(dir.cwiseProduct(raw).sum()) / l1 : 0.0;
}

Matrix clamp_to_box(const Matrix& a, const Matrix& center, double t) {
    return a.array().max(center.array() - t).min(center.array() + t).matrix();
}

enum class Verdict { feasible, certified_infeasible, stalled };

struct FeasibilityResult {
    Verdict verdict = Verdict::stalled;
    Matrix point;
    double distance = 0;
    double bound = 0;
    int sweeps = 0;
};

// Dykstra's method on {PSD} and {|A - raw| <= t}, started from raw. Its PSD
// iterates approach distance t only in the limit, so any PSD point within
// `accept` counts as feasible. A stalled run reports the closest one it met.
FeasibilityResult test_distance(const Matrix& raw, double t, double accept, int max_inner) {
    const auto p = raw.rows();
    FeasibilityResult res;
    Matrix x = raw;
    Matrix inc_cone = Matrix::Zero(p, p);
    Matrix inc_box = Matrix::Zero(p, p);
    Eigen::SelfAdjointEigenSolver<Matrix> es;

    for (int sweep = 1; sweep <= max_inner; ++sweep) {
        res.sweeps = sweep;
        Matrix z = x + inc_cone;
        symmetrize(z);
        es.compute(z);
        const Vector& d = es.eigenvalues();
        const Matrix& v = es.eigenvectors();
        Matrix y = v * d.cwiseMax(0.0).asDiagonal() * v.transpose();
        symmetrize(y);

        const double dist = max_abs(y - raw);
        if (dist <= accept) {
            res.verdict = Verdict::feasible;
            res.point = std::move(y);
            res.distance = dist;
            return res;
        }
        if (sweep == 1 || dist < res.distance) {
            res.point = y;
            res.distance = dist;
        }

        res.bound = std::max({ res.bound, certified_bound(raw, d, v), direction_bound(raw, y - z) });
        if (res.bound > t) {
            res.verdict = Verdict::certified_infeasible;
            return res;
        }

        inc_cone = z - y;
        Matrix w = y + inc_box;
        x = clamp_to_box(w, raw, t);
        inc_box = w - x;
    }
    res.verdict = Verdict::stalled;
    return res;
}

// Euclidean projection onto {|v|_1 <= radius}, entries treated as one vector.
Matrix project_l1_ball(const Matrix& v, double radius) {
    if (v.cwiseAbs().sum() <= radius) {
        return v;
    }
    std::vector<double> mags(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        mags[k] = std::abs(v.data()[k]);
    }
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    double cumulative = 0;
    double cut = 0;
    for (std::size_t i = 0; i < mags.size(); ++i) {
        cumulative += mags[i];
        const double candidate = (cumulative - radius) / static_cast<double>(i + 1);
        if (i + 1 == mags.size() || mags[i + 1] <= candidate) {
            cut = candidate;
            break;
        }
    }
    Matrix out(v.rows(), v.cols());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        const double x = v.data()[k];
        const double m = std::max(std::abs(x) - cut, 0.0);
        out.data()[k] = x < 0 ? -m : m;
    }
    return out;
}

struct SplittingResult {
    Matrix point;
    double upper = 0;
    double lower = 0;
    int iterations = 0;
};

// ADMM on  min |E|_max  s.t.  A - E = raw,  A PSD.  Every iterate yields a PSD
// point (upper bound) and the PSD direction P(M) - M that certifies a lower bound.
SplittingResult split_projection(const Matrix& raw, Matrix best, double upper, double lower, double tol, int max_iters) {
    const auto p = raw.rows();
    SplittingResult res;
    double rho = 1.0 / static_cast<double>(p);
    Matrix slack = Matrix::Zero(p, p);
    Matrix scaled_dual = Matrix::Zero(p, p);
    Eigen::SelfAdjointEigenSolver<Matrix> es;

    int iter = 0;
    while (upper - lower >= tol && iter < max_iters) {
        ++iter;
        Matrix m = raw + slack - scaled_dual;
        symmetrize(m);
        es.compute(m);
        const Matrix& v = es.eigenvectors();
        Matrix a = v * es.eigenvalues().cwiseMax(0.0).asDiagonal() * v.transpose();
        symmetrize(a);

        const double dist = max_abs(a - raw);
        if (dist < upper) {
            upper = dist;
            best = a;
        }
        lower = std::max(lower, direction_bound(raw, a - m));

        const Matrix w = a - raw + scaled_dual;
        const Matrix previous = slack;
        slack = w - project_l1_ball(w, 1.0 / rho);
        const Matrix residual = a - raw - slack;
        scaled_dual += residual;

        if (iter % 10 == 0) {
            const double primal = residual.norm();
            const double dual = rho * (slack - previous).norm();
            if (primal > 5 * dual) {
                rho *= 2;
                scaled_dual /= 2;
            } else if (dual > 5 * primal) {
                rho /= 2;
                scaled_dual *= 2;
            }
        }
    }
    res.point = std::move(best);
    res.upper = upper;
    res.lower = lower;
    res.iterations = iter;
    return res;
}

}

double projection_lower_bound(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    return certified_bound(m, es.eigenvalues(), es.eigenvectors());
}

std::pair<CovEstimate, ProjectionReport> project_psd_inf(const CovEstimate& raw,
                                                         double tol_t,
                                                         double tol_inner,
                                                         int max_inner,
                                                         ProjectionMethod method) {
    const Matrix& s = raw.matrix;
    if (s.rows() != s.cols()) {
        throw std::invalid_argument("covariance estimate must be square");
    }
    if (max_asymmetry(s) > 1e-12 * std::max(1.0, max_abs(s))) {
        throw std::invalid_argument("covariance estimate is not symmetric");
    }
    if (raw.stage != CovStage::raw) {
        throw std::invalid_argument("projection expects a raw covariance estimate");
    }
    if (!(tol_t > 0) || !(tol_inner > 0) || max_inner < 1) {
        throw std::invalid_argument("projection tolerances must be positive");
    }

    ProjectionReport report;
    CovEstimate out;
    out.stage = CovStage::projected;

    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Vector& d = es.eigenvalues();
    if (s.size() == 0 || d(0) >= 0) {
        out.matrix = s;
        out.inf_gap = 0;
        return { std::move(out), report };
    }

    double lower = certified_bound(s, d, es.eigenvectors());
    double certified = lower;

    // Frobenius projection is feasible at distance <= -lambda_min, so it
    // starts the bracket at least as tight as the diagonal repair.
    Matrix best = es.eigenvectors() * d.cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
    symmetrize(best);
    double upper = max_abs(best - s);

    if (method == ProjectionMethod::splitting) {
        SplittingResult res = split_projection(s, std::move(best), upper, lower, tol_t, 10 * max_inner);
        report.inner_iters_total = res.iterations;
        report.t_star = res.upper;
        report.certificate_gap = std::max(0.0, res.upper - res.lower);
        out.matrix = std::move(res.point);
        out.inf_gap = res.upper;
        return { std::move(out), report };
    }

    // Only certificates raise `lower`. A stalled test moves the next probe
    // toward `upper`, where feasible points are easier to reach.
    double frac = 0.5;
    while (upper - lower >= tol_t && report.bisection_iters < 200) {
        const double t = lower + frac * (upper - lower);
        ++report.bisection_iters;
        FeasibilityResult res = test_distance(s, t, t + std::max(tol_inner, 0.5 * (t - lower)), max_inner);
        report.inner_iters_total += res.sweeps;
        lower = std::max(lower, res.bound);
        if (res.verdict == Verdict::certified_infeasible) {
            lower = std::max(lower, t);
        }
        if (res.distance > 0 && res.distance < upper) {
            upper = res.distance;
            best = std::move(res.point);
        }
        frac = res.verdict == Verdict::stalled ? 0.5 * (1 + frac) : 0.5;
        if (lower > upper + 1e-9 * std::max(1.0, upper)) {
            throw std::logic_error("projection bracket inconsistent: certified bound exceeds an achieved distance");
        }
    }
    certified = std::max(certified, lower);

    report.t_star = upper;
    report.certificate_gap = std::max(0.0, upper - certified);
    out.matrix = std::move(best);
    out.inf_gap = upper;
    return { std::move(out), report };
}

CovEstimate shift_cov(const CovEstimate& projected, const ProjectionReport& report) {
    CovEstimate out;
    out.matrix = projected.matrix;
    out.matrix.diagonal().array() += report.t_star;
    out.stage = CovStage::shifted;
    out.inf_gap = report.t_star;
    return out;
}

}
