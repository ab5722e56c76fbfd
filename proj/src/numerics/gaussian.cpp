#include "rg/numerics/gaussian.hpp"

#include "rg/error.hpp"
#include "rg/numerics/ops.hpp"

namespace rg::num {

GaussianParams make_gaussian(Var mu, Var raw_log_var) {
  require(mu.shape() == raw_log_var.shape(), ErrorKind::kDimensionMismatch,
          "gaussian: mu and log_var shapes differ");
  return {mu, clamp(raw_log_var, kLogVarMin, kLogVarMax)};
}

Var gaussian_kl(const GaussianParams& q) {
  require(q.mu.shape() == q.log_var.shape(), ErrorKind::kDimensionMismatch,
          "gaussian_kl: mu and log_var shapes differ");
  Var terms = sub(add(square(q.mu), exp(q.log_var)), add_scalar(q.log_var, 1.0));
  return scale(sum(terms), 0.5 / static_cast<Scalar>(q.mu.rows()));
}

Var reparameterize(const GaussianParams& q, Stream& rng) {
  Tape& tape = *q.mu.tape();
  Var eps = tape.constant(rng.normal_tensor(q.mu.shape()));
  return add(q.mu, mul(exp(scale(q.log_var, 0.5)), eps));
}

}  // namespace rg::num
