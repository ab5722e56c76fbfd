#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rg/numerics/tensor.hpp"

namespace rg::num {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

struct BackwardArgs {
  const Tensor& out;
  const Tensor& grad_out;
  std::span<const Tensor* const> in;
  // Null for inputs that do not need a gradient. Implementations accumulate.
  std::span<Tensor* const> grad_in;
};

using BackwardFn = std::function<void(const BackwardArgs&)>;

// Records primitive applications within one loss evaluation and replays them
// in reverse. Confined to one thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A tracked leaf (parameter). Gradients are reported for these.
  Var leaf(Tensor value);
  // An untracked input; gradients never flow into it.
  Var constant(Tensor value);
  // Copies the value of `v` into a fresh constant, cutting gradient flow.
  Var detach(Var v);

  // Used by primitives. Throws kNumeric if `value` holds NaN/Inf.
  Var record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  // Reverse sweep from a scalar loss. Returns d loss / d p for each p in
  // `wrt`, zero-filled for parameters the loss does not depend on.
  std::vector<Tensor> backward(Var loss, std::span<const Var> wrt);

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    const char* op;
    Tensor value;
    bool requires_grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
};

}  // namespace rg::num
