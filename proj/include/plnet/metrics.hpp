#ifndef PLNET_METRICS_HPP
#define PLNET_METRICS_HPP

#include "dtrace.hpp"
#include "types.hpp"

#include <optional>
#include <utility>

namespace plnet {

/// Edge-level confusion counts over the upper-triangle off-diagonal pairs.
struct EdgeConfusion {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;
};

/// An estimated edge is any `|theta_jk| > 1e-8` with `j < k`.
EdgeConfusion edge_confusion(const Matrix& estimate, const TrueNetwork& truth);

/**
 * Area under the precision-recall curve traced by the path. Fits with no
 * estimated edges are skipped; the curve starts at recall 0 with the precision
 * of the lowest-recall point and is integrated by the trapezoid rule.
 * Throws `std::invalid_argument` if the truth has no edges.
 */
double aupr(const PathResult& path, const TrueNetwork& truth);

/// Area under the ROC curve traced by the path, closed with (0, 0) and (1, 1).
double auc(const PathResult& path, const TrueNetwork& truth);

/// True positive rate, and true discovery rate when at least one edge was estimated.
std::pair<double, std::optional<double> > tpr_tdr(const PrecisionEstimate& theta_hat, const TrueNetwork& truth);

double frobenius_risk(const PrecisionEstimate& theta_hat, const TrueNetwork& truth);

/// `-theta_jk / sqrt(theta_jj theta_kk)` off the diagonal, 1 on it.
Matrix partial_corr(const PrecisionEstimate& theta);

}

#endif
