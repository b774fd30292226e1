#include "plnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace plnet {

namespace {

constexpr double edge_threshold = 1e-8;

void check_dims(const Matrix& estimate, const TrueNetwork& truth) {
    if (estimate.rows() != truth.theta.rows() || estimate.cols() != truth.theta.cols()) {
        throw std::invalid_argument("estimate and truth have different dimensions");
    }
}

void check_path(const PathResult& path, const TrueNetwork& truth) {
    if (truth.support.empty()) {
        throw std::invalid_argument("true network has no edges");
    }
    for (const auto& est : path.estimates) {
        check_dims(est.theta, truth);
    }
}

double trapezoid(std::vector<std::pair<double, double> >& pts) {
    double area = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        area += (pts[i].first - pts[i - 1].first) * 0.5 * (pts[i].second + pts[i - 1].second);
    }
    return area;
}

}

EdgeConfusion edge_confusion(const Matrix& estimate, const TrueNetwork& truth) {
    check_dims(estimate, truth);
    EdgeConfusion c;
    const auto p = estimate.rows();
    for (Eigen::Index k = 0; k < p; ++k) {
        for (Eigen::Index j = 0; j < k; ++j) {
            const bool est = std::abs(estimate(j, k)) > edge_threshold;
            const bool real = truth.theta(j, k) != 0;
            if (est && real) {
                ++c.tp;
            } else if (est) {
                ++c.fp;
            } else if (real) {
                ++c.fn;
            } else {
                ++c.tn;
            }
        }
    }
    return c;
}

double aupr(const PathResult& path, const TrueNetwork& truth) {
    check_path(path, truth);
    // (recall, precision)
    std::vector<std::pair<double, double> > pts;
    for (const auto& est : path.estimates) {
        const auto c = edge_confusion(est.theta, truth);
        if (c.tp + c.fp == 0) {
            continue;
        }
        pts.emplace_back(static_cast<double>(c.tp) / (c.tp + c.fn), static_cast<double>(c.tp) / (c.tp + c.fp));
    }
    if (pts.empty()) {
        return 0;
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.first < b.first || (a.first == b.first && a.second > b.second);
    });
    pts.insert(pts.begin(), { 0.0, pts.front().second });
    return trapezoid(pts);
}

double auc(const PathResult& path, const TrueNetwork& truth) {
    check_path(path, truth);
    // (fpr, tpr)
    std::vector<std::pair<double, double> > pts{ { 0.0, 0.0 }, { 1.0, 1.0 } };
    for (const auto& est : path.estimates) {
        const auto c = edge_confusion(est.theta, truth);
        const double fpr = c.fp + c.tn > 0 ? static_cast<double>(c.fp) / (c.fp + c.tn) : 0.0;
        pts.emplace_back(fpr, static_cast<double>(c.tp) / (c.tp + c.fn));
    }
    std::sort(pts.begin(), pts.end());
    return trapezoid(pts);
}

std::pair<double, std::optional<double> > tpr_tdr(const PrecisionEstimate& theta_hat, const TrueNetwork& truth) {
    const auto c = edge_confusion(theta_hat.theta, truth);
    const double tpr = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    std::optional<double> tdr;
    if (c.tp + c.fp > 0) {
        tdr = static_cast<double>(c.tp) / (c.tp + c.fp);
    }
    return { tpr, tdr };
}

double frobenius_risk(const PrecisionEstimate& theta_hat, const TrueNetwork& truth) {
    check_dims(theta_hat.theta, truth);
    return (theta_hat.theta - truth.theta).norm();
}

Matrix partial_corr(const PrecisionEstimate& theta) {
    const Matrix& t = theta.theta;
    const auto p = t.rows();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(t(j, j) > 0)) {
            throw std::invalid_argument("precision matrix has a nonpositive diagonal entry at index " + std::to_string(j));
        }
    }
    Matrix r(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        for (Eigen::Index j = 0; j < p; ++j) {
            r(j, k) = (j == k) ? 1.0 : -t(j, k) / std::sqrt(t(j, j) * t(k, k));
        }
    }
    return r;
}

}
