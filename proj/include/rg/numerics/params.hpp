#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rg/numerics/tape.hpp"
#include "rg/numerics/tensor.hpp"

namespace rg::num {

struct NamedTensor {
  std::string name;
  Tensor value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

// Ordered, named collection of trainable tensors.
class ParamSet {
 public:
  void add(std::string name, Tensor value);

  std::size_t size() const { return items_.size(); }
  std::size_t numel() const;
  NamedTensor& operator[](std::size_t i) { return items_[i]; }
  const NamedTensor& operator[](std::size_t i) const { return items_[i]; }
  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  // Registers every tensor on the tape as a tracked leaf.
  std::vector<Var> bind(Tape& tape) const;
  // Registers every tensor as an untracked constant.
  std::vector<Var> bind_constant(Tape& tape) const;

  std::vector<Tensor*> pointers();

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<NamedTensor> items_;
};

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

AdamState make_adam_state(const AdamConfig& config, std::span<Tensor* const> params);

// One bias-corrected Adam update. Moments are (re)allocated on the first step
// if the state is empty.
void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads);

}  // namespace rg::num
