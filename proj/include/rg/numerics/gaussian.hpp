#pragma once

#include "rg/numerics/random.hpp"
#include "rg/numerics/tape.hpp"

namespace rg::num {

inline constexpr Scalar kLogVarMin = -10.0;
inline constexpr Scalar kLogVarMax = 10.0;

// Diagonal Gaussian posterior q(z|.) = N(mu, exp(log_var)), one row per sample.
struct GaussianParams {
  Var mu;
  Var log_var;
};

// Builds posterior parameters from raw encoder output: log_var is clamped to
// [kLogVarMin, kLogVarMax].
GaussianParams make_gaussian(Var mu, Var raw_log_var);

// KL(q || N(0, I)) = 0.5 * sum(mu^2 + exp(lv) - lv - 1), summed over latent
// dimensions and averaged over rows.
Var gaussian_kl(const GaussianParams& q);

// z = mu + exp(0.5 * log_var) * eps with eps ~ N(0, I) drawn from `rng`.
// eps enters as a constant, so gradients reach mu and log_var only.
Var reparameterize(const GaussianParams& q, Stream& rng);

}  // namespace rg::num
