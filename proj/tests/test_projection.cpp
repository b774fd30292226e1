#include "oracles.hpp"
#include "plnet/linalg.hpp"
#include "plnet/projection.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace plnet;

namespace {

CovEstimate raw_of(const Matrix& m) {
    CovEstimate c;
    c.matrix = m;
    c.stage = CovStage::raw;
    return c;
}

const ProjectionMethod both_methods[] = { ProjectionMethod::splitting, ProjectionMethod::bisection };

std::string name(ProjectionMethod m) {
    return m == ProjectionMethod::splitting ? "splitting" : "bisection";
}

// Splitting certifies its answer to the requested tolerance. Bisection only
// guarantees a valid bracket around the optimum and gets within a percent.
void expect_optimal(const ProjectionReport& rep, double t, ProjectionMethod method) {
    EXPECT_GE(rep.t_star, t - 1e-9) << name(method);
    EXPECT_LE(rep.t_star - rep.certificate_gap, t + 1e-9) << name(method);
    EXPECT_NEAR(rep.t_star, t, method == ProjectionMethod::splitting ? 1e-4 : 1e-2) << name(method);
}

void expect_valid_projection(const Matrix& raw, const CovEstimate& out, const ProjectionReport& rep, double tol_t) {
    EXPECT_EQ(out.stage, CovStage::projected);
    EXPECT_GE(min_eigenvalue(out.matrix), -1e-8);
    EXPECT_LE(max_abs(out.matrix - raw), rep.t_star + tol_t);
    EXPECT_LE(max_asymmetry(out.matrix), 1e-12);
    EXPECT_EQ(out.inf_gap, rep.t_star);
    EXPECT_GE(rep.t_star, 0);
    EXPECT_GE(rep.certificate_gap, 0);
    EXPECT_LE(rep.t_star, std::max(0.0, -min_eigenvalue(raw)) + tol_t);
    EXPECT_LE(projection_lower_bound(raw), rep.t_star + 1e-12);
}

}

TEST(ProjectPsdInf, PsdInputIsReturnedUnchanged) {
    for (auto method : both_methods) {
        for (const Matrix& m : { Matrix(Matrix::Identity(2, 2)), oracle::random_pd(6, 4) }) {
            const auto [out, rep] = project_psd_inf(raw_of(m), 1e-6, 1e-8, 5000, method);
            EXPECT_TRUE(out.matrix == m) << name(method);
            EXPECT_EQ(rep.t_star, 0.0);
            EXPECT_EQ(rep.bisection_iters, 0);
            EXPECT_EQ(rep.inner_iters_total, 0);
        }
    }
}

TEST(ProjectPsdInf, TwoByTwoWithNegativeEigenvalue) {
    Matrix s(2, 2);
    s << 1, 2, 2, 1;
    EXPECT_DOUBLE_EQ(oracle::projection_2x2(s), 0.5);
    for (auto method : both_methods) {
        const auto [out, rep] = project_psd_inf(raw_of(s), 1e-6, 1e-8, 5000, method);
        EXPECT_NEAR(rep.t_star, 0.5, 1e-4) << name(method);
        EXPECT_LE(rep.certificate_gap, 1e-4);
        expect_valid_projection(s, out, rep, 1e-6);
    }
}

TEST(ProjectPsdInf, NegativeDiagonal) {
    Matrix s(2, 2);
    s << -1, 0, 0, 1;
    EXPECT_DOUBLE_EQ(oracle::projection_2x2(s), 1.0);
    for (auto method : both_methods) {
        const auto [out, rep] = project_psd_inf(raw_of(s), 1e-6, 1e-8, 5000, method);
        EXPECT_NEAR(rep.t_star, 1.0, 1e-4) << name(method);
        EXPECT_LE(rep.certificate_gap, 1e-4);
        expect_valid_projection(s, out, rep, 1e-6);
    }
}

TEST(ProjectPsdInf, RandomTwoByTwoMatchClosedForm) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Matrix s = oracle::random_symmetric(2, seed, 2.0);
        const double t = oracle::projection_2x2(s);
        for (auto method : both_methods) {
            const auto [out, rep] = project_psd_inf(raw_of(s), 1e-6, 1e-8, 5000, method);
            SCOPED_TRACE(seed);
            expect_optimal(rep, t, method);
            expect_valid_projection(s, out, rep, 1e-6);
        }
    }
}

TEST(ProjectPsdInf, MatchesConicSolverFixtures) {
    // Optimal values from an interior-point conic solver (agreeing with two
    // other solvers to 1e-8) on min t s.t. A PSD, |A - S|_max <= t.
    Matrix a5(5, 5);
    a5 << 1.0, 0.9, -0.4, 0.7, 0.2, 0.9, 0.5, 0.8, -0.3, 0.6, -0.4, 0.8, 0.3, 0.9, -0.5, 0.7, -0.3, 0.9, 0.2, 0.4, 0.2,
        0.6, -0.5, 0.4, 0.8;
    Matrix b4(4, 4);
    b4 << 0.2, -1.1, 0.3, 0.0, -1.1, 0.4, 0.9, -0.2, 0.3, 0.9, -0.3, 0.6, 0.0, -0.2, 0.6, 1.5;
    const std::pair<Matrix, double> cases[] = { { a5, 0.39952038 }, { b4, 0.49780220 } };
    for (const auto& [s, t] : cases) {
        for (auto method : both_methods) {
            const auto [out, rep] = project_psd_inf(raw_of(s), 1e-6, 1e-8, 5000, method);
            expect_optimal(rep, t, method);
            expect_valid_projection(s, out, rep, 1e-6);
        }
    }
}

TEST(ProjectPsdInf, MethodsAgreeOnRandomIndefiniteMatrices) {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const Matrix s = oracle::random_symmetric(6, seed);
        const auto [a, ra] = project_psd_inf(raw_of(s), 1e-6, 1e-8, 5000, ProjectionMethod::splitting);
        const auto [b, rb] = project_psd_inf(raw_of(s), 1e-6, 1e-8, 5000, ProjectionMethod::bisection);
        EXPECT_LE(ra.t_star, rb.t_star + 1e-9) << seed;
        EXPECT_NEAR(ra.t_star, rb.t_star, 1e-2) << seed;
        EXPECT_LE(ra.certificate_gap, 1e-6);
        EXPECT_GE(ra.t_star, rb.t_star - rb.certificate_gap - 1e-9);
        expect_valid_projection(s, a, ra, 1e-6);
        expect_valid_projection(s, b, rb, 1e-6);
    }
}

TEST(ProjectPsdInf, NeverWorseThanDiagonalRepair) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix s = oracle::random_symmetric(8, 500 + seed);
        const double naive = std::max(0.0, -min_eigenvalue(s));
        const auto [out, rep] = project_psd_inf(raw_of(s));
        EXPECT_LE(max_abs(out.matrix - s), naive + 1e-6);
    }
}

TEST(ProjectPsdInf, RejectsBadInput) {
    Matrix s(2, 2);
    s << 1, 2, 2.1, 1;
    EXPECT_THROW(project_psd_inf(raw_of(s)), std::invalid_argument);
    CovEstimate projected = raw_of(Matrix::Identity(2, 2));
    projected.stage = CovStage::projected;
    EXPECT_THROW(project_psd_inf(projected), std::invalid_argument);
    EXPECT_THROW(project_psd_inf(raw_of(Matrix::Identity(2, 2)), 0.0), std::invalid_argument);
}

TEST(ProjectionLowerBound, EigenvectorCertificate) {
    Matrix s(2, 2);
    s << 1, 2, 2, 1;
    EXPECT_NEAR(projection_lower_bound(s), 0.5, 1e-12);
    EXPECT_EQ(projection_lower_bound(Matrix::Identity(3, 3)), 0.0);
}

TEST(ShiftCov, AddsTheGapToTheDiagonal) {
    CovEstimate projected;
    projected.matrix = Matrix::Constant(2, 2, 1.5);
    projected.stage = CovStage::projected;
    ProjectionReport rep;
    rep.t_star = 0.5;
    const CovEstimate shifted = shift_cov(projected, rep);
    Matrix expected(2, 2);
    expected << 2.0, 1.5, 1.5, 2.0;
    EXPECT_TRUE(shifted.matrix == expected);
    EXPECT_EQ(shifted.stage, CovStage::shifted);
    EXPECT_EQ(shifted.inf_gap, 0.5);

    rep.t_star = 0;
    EXPECT_TRUE(shift_cov(projected, rep).matrix == projected.matrix);
}

TEST(ShiftCov, ShiftsEverySpectralValue) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix s = oracle::random_symmetric(7, 900 + seed);
        const auto [proj, rep] = project_psd_inf(raw_of(s));
        const CovEstimate shifted = shift_cov(proj, rep);
        Eigen::SelfAdjointEigenSolver<Matrix> a(proj.matrix), b(shifted.matrix);
        EXPECT_LT((b.eigenvalues() - a.eigenvalues().array().matrix() - Vector::Constant(7, rep.t_star))
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-10);
        EXPECT_TRUE((shifted.matrix - proj.matrix).isDiagonal(0.0));
    }
}
