#include "plnet/model.hpp"
#include "plnet/linalg.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace plnet {

std::string to_string(CovStage stage) {
    switch (stage) {
    case CovStage::raw:
        return "raw";
    case CovStage::projected:
        return "projected";
    case CovStage::shifted:
        return "shifted";
    }
    return "unknown";
}

void CountMatrix::validate() const {
    if (lib_sizes.size() != counts.rows()) {
        throw InputError("library sizes have length " + std::to_string(lib_sizes.size()) +
                         " but there are " + std::to_string(counts.rows()) + " cells");
    }
    if (!gene_names.empty() && static_cast<Eigen::Index>(gene_names.size()) != counts.cols()) {
        throw InputError("gene name count does not match the number of columns");
    }
    if (!cell_ids.empty() && static_cast<Eigen::Index>(cell_ids.size()) != counts.rows()) {
        throw InputError("cell id count does not match the number of rows");
    }
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
        for (Eigen::Index i = 0; i < counts.rows(); ++i) {
            double y = counts(i, j);
            if (!(y >= 0) || std::floor(y) != y) {
                std::ostringstream msg;
                msg << "invalid count " << y << " at row " << i + 1 << " col " << j + 1;
                throw InputError(msg.str());
            }
        }
    }
    for (Eigen::Index i = 0; i < lib_sizes.size(); ++i) {
        if (!(lib_sizes(i) > 0) || !std::isfinite(lib_sizes(i))) {
            throw InputError("library size of cell " + std::to_string(i) + " is not strictly positive");
        }
    }
}

TrueNetwork TrueNetwork::from_theta(Matrix theta) {
    TrueNetwork out;
    const auto p = theta.rows();
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            if (std::abs(theta(i, j)) > 0) {
                out.support.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }
    out.theta = std::move(theta);
    return out;
}

CountMatrix pln_sample(const LatentParams& params, const Vector& lib_sizes, std::uint64_t seed) {
    const auto p = params.mu.size();
    const auto n = lib_sizes.size();
    if (params.sigma.rows() != p || params.sigma.cols() != p) {
        throw std::invalid_argument("sigma must be p x p with p = length of mu");
    }
    if (n < 1) {
        throw std::invalid_argument("need at least one cell");
    }
    if (max_asymmetry(params.sigma) > 1e-12) {
        throw std::invalid_argument("sigma is not symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(params.sigma);
    const double lmin = es.eigenvalues()(0);
    if (!(lmin > 0)) {
        std::ostringstream msg;
        msg << "sigma is not positive definite (smallest eigenvalue " << lmin << ")";
        throw std::invalid_argument(msg.str());
    }
    const Matrix& v = es.eigenvectors();
    const Matrix root = v * es.eigenvalues().cwiseSqrt().asDiagonal() * v.transpose();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    CountMatrix out;
    out.counts.resize(n, p);
    out.lib_sizes = lib_sizes;

    Vector g(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            g(j) = gauss(rng);
        }
        Vector z = params.mu + root * g;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double rate = lib_sizes(i) * std::exp(z(j));
            if (!(rate <= 1e12)) {
                throw std::overflow_error("latent rate overflow");
            }
            std::poisson_distribution<long long> pois(rate);
            out.counts(i, j) = rate > 0 ? static_cast<double>(pois(rng)) : 0.0;
        }
    }
    return out;
}

PlnMoments pln_moments(const LatentParams& params, double /*s*/) {
    const auto p = params.mu.size();
    PlnMoments out;
    out.mean.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        out.mean(j) = std::exp(params.mu(j) + 0.5 * params.sigma(j, j));
    }
    out.diag_factorial_moment.resize(p);
    out.cross_moment.resize(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = 0; k < p; ++k) {
            out.cross_moment(j, k) = out.mean(j) * out.mean(k) * std::exp(params.sigma(j, k));
        }
        out.diag_factorial_moment(j) = out.cross_moment(j, j);
    }
    return out;
}

Vector estimate_lib_sizes(const Matrix& counts) {
    Vector s = counts.rowwise().sum();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (!(s(i) > 0)) {
            throw InputError("cell at row " + std::to_string(i) + " has no counts; cannot estimate its library size");
        }
    }
    return s;
}

}
