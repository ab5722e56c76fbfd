#pragma once

#include <span>
#include <string>
#include <vector>

#include "rg/numerics/params.hpp"
#include "rg/numerics/random.hpp"

namespace rg::num {

enum class Activation { kIdentity, kTanh, kRelu, kSigmoid };

// Stack of dense layers: widths {in, h1, ..., out}. Hidden layers use
// `hidden`, the last layer uses `output`.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::string& prefix, std::vector<std::size_t> widths, Activation hidden,
      Activation output, Stream rng, Scalar output_gain = 1.0);

  std::size_t in_dim() const { return widths_.front(); }
  std::size_t out_dim() const { return widths_.back(); }
  const std::vector<std::size_t>& widths() const { return widths_; }

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  // `bound` must be params().bind(...) (or bind_constant) on x's tape.
  Var forward(std::span<const Var> bound, Var x) const;

 private:
  std::vector<std::size_t> widths_;
  Activation hidden_ = Activation::kTanh;
  Activation output_ = Activation::kIdentity;
  ParamSet params_;
};

Var activate(Var x, Activation act);

}  // namespace rg::num
