#include "rg/numerics/params.hpp"

#include <cmath>

#include "rg/error.hpp"

namespace rg::num {

void ParamSet::add(std::string name, Tensor value) {
  for (const auto& it : items_) {
    require(it.name != name, ErrorKind::kInvalidArgument, "duplicate parameter name " + name);
  }
  items_.push_back({std::move(name), std::move(value)});
}

std::size_t ParamSet::numel() const {
  std::size_t n = 0;
  for (const auto& it : items_) n += it.value.numel();
  return n;
}

std::vector<Var> ParamSet::bind(Tape& tape) const {
  std::vector<Var> out;
  out.reserve(items_.size());
  for (const auto& it : items_) out.push_back(tape.leaf(it.value));
  return out;
}

std::vector<Var> ParamSet::bind_constant(Tape& tape) const {
  std::vector<Var> out;
  out.reserve(items_.size());
  for (const auto& it : items_) out.push_back(tape.constant(it.value));
  return out;
}

std::vector<Tensor*> ParamSet::pointers() {
  std::vector<Tensor*> out;
  out.reserve(items_.size());
  for (auto& it : items_) out.push_back(&it.value);
  return out;
}

AdamState make_adam_state(const AdamConfig& config, std::span<Tensor* const> params) {
  AdamState s;
  s.config = config;
  for (const Tensor* p : params) {
    s.m.push_back(Tensor::zeros_like(*p));
    s.v.push_back(Tensor::zeros_like(*p));
  }
  return s;
}

void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads) {
  require(params.size() == grads.size(), ErrorKind::kDimensionMismatch,
          "adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.push_back(Tensor::zeros_like(*p));
      state.v.push_back(Tensor::zeros_like(*p));
    }
  }
  require(state.m.size() == params.size(), ErrorKind::kDimensionMismatch,
          "adam_step: optimizer state does not match parameter count");
  for (std::size_t k = 0; k < params.size(); ++k) {
    require(params[k]->shape() == grads[k].shape() && state.m[k].shape() == grads[k].shape(),
            ErrorKind::kDimensionMismatch,
            "adam_step: shape mismatch at parameter " + std::to_string(k) + ": " +
                shape_str(params[k]->shape()) + " vs " + shape_str(grads[k].shape()));
  }

  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    const Tensor& g = grads[k];
    for (std::size_t i = 0; i < p.numel(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

}  // namespace rg::num
