#ifndef PLNET_TESTS_ORACLES_HPP
#define PLNET_TESTS_ORACLES_HPP

// Reference computations that share no code with the library under test.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Gauss-Hermite nodes and weights for the weight exp(-x^2), via Golub-Welsch.
void gauss_hermite(int m, Vector& nodes, Vector& weights);

/// E f(w) for w ~ N(mean, var).
double normal_expectation(const std::function<double(double)>& f, double mean, double var, int m = 80);

/**
 * P(Y = 0) when Y ~ Poisson(S exp(z)), z ~ N(mu, var) and log S ~ N(log_s_mean, log_s_var)
 * independently: the rate is exp(w) with w ~ N(mu + log_s_mean, var + log_s_var).
 */
double zero_probability(double mu, double var, double log_s_mean, double log_s_var);

/// Exact optimal value of the 2 x 2 max-norm PSD projection, by bisection on a closed-form feasibility test.
double projection_2x2(const Matrix& s);

/// True if some PSD matrix lies within max-distance `t` of the 2 x 2 matrix `s`.
bool feasible_2x2(const Matrix& s, double t);

/**
 * Minimizer of 0.5 tr(T S T) - tr(T) + lambda sum_{j != k} |T_jk| over symmetric T
 * by proximal gradient with step 1 / lambda_max(S), stopped when the
 * gradient-mapping norm (max entry) falls below `tol`.
 */
Matrix dtrace_prox_grad(const Matrix& s, double lambda, double tol = 1e-10, long max_iters = 5000000);

double dtrace_objective(const Matrix& theta, const Matrix& s, double lambda);

/// Symmetric PD matrix `A A' / p + floor I` with entries of `A` uniform on [-1, 1].
Matrix random_pd(int p, std::uint64_t seed, double floor = 0.3);

/// Symmetric matrix with entries uniform on [-scale, scale].
Matrix random_symmetric(int p, std::uint64_t seed, double scale = 1.0);

/// Area by the trapezoid rule under the polyline through `points` (x ascending).
double trapezoid(const std::vector<std::pair<double, double> >& points);

}

#endif
