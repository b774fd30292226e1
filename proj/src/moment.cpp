#include "plnet/moment.hpp"

#include <cmath>

namespace plnet {

namespace {

constexpr Eigen::Index block_rows = 1024;
constexpr double log_floor = 1e-12;

// Neumaier's variant of Kahan summation, element-wise.
template<class Acc, class Part>
void compensated_add(Acc& sum, Acc& comp, const Part& part) {
    for (Eigen::Index k = 0; k < sum.size(); ++k) {
        double s = sum.data()[k];
        double x = part.data()[k];
        double t = s + x;
        if (std::abs(s) >= std::abs(x)) {
            comp.data()[k] += (s - t) + x;
        } else {
            comp.data()[k] += (x - t) + s;
        }
        sum.data()[k] = t;
    }
}

}

MomentAccumulator::MomentAccumulator(Eigen::Index p) :
    p_(p),
    first_(Vector::Zero(p)), first_c_(Vector::Zero(p)),
    factorial_(Vector::Zero(p)), factorial_c_(Vector::Zero(p)),
    cross_(Matrix::Zero(p, p)), cross_c_(Matrix::Zero(p, p)) {}

void MomentAccumulator::add_partial(const Vector& first, const Vector& factorial, const Matrix& cross) {
    compensated_add(first_, first_c_, first);
    compensated_add(factorial_, factorial_c_, factorial);
    compensated_add(cross_, cross_c_, cross);
}

void MomentAccumulator::add(const CountMatrix& block) {
    if (p_ < 0) {
        *this = MomentAccumulator(block.n_genes());
    } else if (block.n_genes() != p_) {
        throw InputError("chunk has " + std::to_string(block.n_genes()) + " genes, expected " + std::to_string(p_));
    }
    if (block.lib_sizes.size() != block.n_cells()) {
        throw InputError("chunk library sizes do not match its row count");
    }

    for (Eigen::Index start = 0; start < block.n_cells(); start += block_rows) {
        const Eigen::Index len = std::min(block_rows, block.n_cells() - start);
        const auto y = block.counts.middleRows(start, len);
        const Vector inv_s = block.lib_sizes.segment(start, len).cwiseInverse();
        for (Eigen::Index i = 0; i < len; ++i) {
            if (!(inv_s(i) > 0) || !std::isfinite(inv_s(i))) {
                throw InputError("library size of cell " + std::to_string(n_ + start + i) + " is not strictly positive");
            }
        }

        const Matrix scaled = inv_s.asDiagonal() * y;
        const Vector first = scaled.colwise().sum().transpose();
        const Matrix fact_terms = (scaled.array() * (y.array() - 1.0) * inv_s.replicate(1, p_).array()).matrix();
        const Vector factorial = fact_terms.colwise().sum().transpose();
        const Matrix cross = scaled.transpose() * scaled;
        add_partial(first, factorial, cross);
    }
    n_ += block.n_cells();
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.p_ < 0) {
        return;
    }
    if (p_ < 0) {
        *this = other;
        return;
    }
    if (other.p_ != p_) {
        throw InputError("cannot merge accumulators with different gene counts");
    }
    add_partial(other.first_, other.factorial_, other.cross_);
    first_c_ += other.first_c_;
    factorial_c_ += other.factorial_c_;
    cross_c_ += other.cross_c_;
    n_ += other.n_;
}

std::pair<CovEstimate, MomentDiagnostics> MomentAccumulator::finish() const {
    if (p_ < 0 || n_ == 0) {
        throw InputError("no data");
    }
    if (n_ < 2) {
        throw InputError("need at least two cells for the moment estimator");
    }

    const double n = static_cast<double>(n_);
    const Vector alpha = (first_ + first_c_) / n;
    std::vector<int> empty_genes;
    for (Eigen::Index j = 0; j < p_; ++j) {
        if (!(alpha(j) > 0)) {
            empty_genes.push_back(static_cast<int>(j));
        }
    }
    if (!empty_genes.empty()) {
        std::string msg = "genes with all-zero counts (0-based indices):";
        for (int j : empty_genes) {
            msg += " " + std::to_string(j);
        }
        throw InputError(msg);
    }

    const Vector log_alpha = alpha.array().log().matrix();
    const Vector factorial = (factorial_ + factorial_c_) / n;
    const Matrix cross = (cross_ + cross_c_) / n;

    MomentDiagnostics diag;
    diag.floor_value = log_floor;
    CovEstimate est;
    est.stage = CovStage::raw;
    est.matrix.resize(p_, p_);

    for (Eigen::Index j = 0; j < p_; ++j) {
        for (Eigen::Index k = j; k < p_; ++k) {
            double m = (j == k) ? factorial(j) : cross(j, k);
            if (!(m > log_floor)) {
                m = log_floor;
                diag.clamped_pairs.emplace_back(static_cast<int>(j), static_cast<int>(k));
            }
            const double value = std::log(m) - log_alpha(j) - log_alpha(k);
            est.matrix(j, k) = value;
            est.matrix(k, j) = value;
        }
    }
    diag.n_clamped_entries = static_cast<int>(diag.clamped_pairs.size());
    return { std::move(est), std::move(diag) };
}

std::pair<CovEstimate, MomentDiagnostics> moment_cov(const CountMatrix& data) {
    MomentAccumulator acc;
    acc.add(data);
    return acc.finish();
}

std::pair<CovEstimate, MomentDiagnostics> moment_cov_stream(const ChunkSource& next_chunk) {
    MomentAccumulator acc;
    while (auto chunk = next_chunk()) {
        acc.add(*chunk);
    }
    return acc.finish();
}

}
