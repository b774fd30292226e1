#ifndef PLNET_MODEL_HPP
#define PLNET_MODEL_HPP

#include "types.hpp"

#include <cstdint>

namespace plnet {

/**
 * Draws `lib_sizes.size()` cells from the Poisson log-normal model.
 *
 * Each row gets `z ~ N(mu, sigma)` through the symmetric square root of `sigma`,
 * latent expression `exp(z)`, and independent Poisson counts with rate
 * `lib_size * exp(z)`. The generator is owned by the call, so the result is a
 * pure function of the arguments.
 *
 * Throws `std::invalid_argument` if `sigma` is not positive definite (the message
 * carries the smallest eigenvalue) and `std::overflow_error("latent rate overflow")`
 * if any Poisson rate exceeds 1e12.
 */
CountMatrix pln_sample(const LatentParams& params, const Vector& lib_sizes, std::uint64_t seed);

struct PlnMoments {
    /// `E(Y_j / s)`, i.e. `alpha_j = exp(mu_j + sigma_jj / 2)`.
    Vector mean;
    /// `E((Y_j^2 - Y_j) / s^2) = alpha_j^2 exp(sigma_jj)`.
    Vector diag_factorial_moment;
    /// `E(Y_j Y_k / s^2) = alpha_j alpha_k exp(sigma_jk)`; the diagonal repeats the factorial moment.
    Matrix cross_moment;
};

/**
 * Closed-form library-size-scaled moments of the model. These are independent
 * of `s`, which is accepted for symmetry with the sampler.
 */
PlnMoments pln_moments(const LatentParams& params, double s);

/// Total-sum scaling: one library size per cell, the raw row sum.
Vector estimate_lib_sizes(const Matrix& counts);

}

#endif
