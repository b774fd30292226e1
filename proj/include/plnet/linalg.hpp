#ifndef PLNET_LINALG_HPP
#define PLNET_LINALG_HPP

#include "types.hpp"

#include <Eigen/Eigenvalues>

namespace plnet {

/// Element-wise max absolute value.
inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_asymmetry(const Matrix& m) {
    return max_abs(m - m.transpose());
}

inline double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/**
 * Projection of a symmetric matrix onto `{A : A >= floor * I}` in Frobenius norm,
 * done by clipping eigenvalues from below.
 */
inline Matrix clip_eigenvalues(const Matrix& m, double floor) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Vector d = es.eigenvalues().cwiseMax(floor);
    const Matrix& v = es.eigenvectors();
    Matrix out = v * d.asDiagonal() * v.transpose();
    return 0.5 * (out + out.transpose());
}

inline void symmetrize(Matrix& m) {
    m = 0.5 * (m + m.transpose()).eval();
}

}

#endif
