#include "rg/numerics/mlp.hpp"

#include <cmath>

#include "rg/error.hpp"
#include "rg/numerics/ops.hpp"

namespace rg::num {

Var activate(Var x, Activation act) {
  switch (act) {
    case Activation::kIdentity: return x;
    case Activation::kTanh: return tanh(x);
    case Activation::kRelu: return relu(x);
    case Activation::kSigmoid: return sigmoid(x);
  }
  return x;
}

Mlp::Mlp(const std::string& prefix, std::vector<std::size_t> widths, Activation hidden,
         Activation output, Stream rng, Scalar output_gain)
    : widths_(std::move(widths)), hidden_(hidden), output_(output) {
  require(widths_.size() >= 2, ErrorKind::kInvalidArgument, "Mlp needs at least one layer");
  const std::size_t layers = widths_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = widths_[l];
    const std::size_t out = widths_[l + 1];
    // Glorot-uniform weights, bias uniform in +-1/sqrt(fan_in).
    double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    double bias_limit = 1.0 / std::sqrt(static_cast<double>(in));
    if (l + 1 == layers) {
      limit *= output_gain;
      bias_limit *= output_gain;
    }
    Stream layer_rng = rng.split(l);
    params_.add(prefix + ".w" + std::to_string(l), layer_rng.uniform_tensor({in, out}, -limit, limit));
    params_.add(prefix + ".b" + std::to_string(l),
                layer_rng.split("bias").uniform_tensor({1, out}, -bias_limit, bias_limit));
  }
}

Var Mlp::forward(std::span<const Var> bound, Var x) const {
  require(bound.size() == params_.size(), ErrorKind::kInvalidArgument,
          "Mlp::forward: bound parameter count mismatch");
  require(x.cols() == in_dim(), ErrorKind::kDimensionMismatch,
          "Mlp::forward: input width " + std::to_string(x.cols()) + " != " +
              std::to_string(in_dim()));
  const std::size_t layers = widths_.size() - 1;
  Var h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    h = affine(h, bound[2 * l], bound[2 * l + 1]);
    h = activate(h, l + 1 == layers ? output_ : hidden_);
  }
  return h;
}

}  // namespace rg::num
