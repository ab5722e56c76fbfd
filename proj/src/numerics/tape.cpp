#include "rg/numerics/tape.hpp"

#include <string>

#include "rg/error.hpp"

namespace rg::num {

const Tensor& Var::value() const {
  require(tape_ != nullptr, ErrorKind::kInvalidArgument, "use of an unbound Var");
  return tape_->value(id_);
}

bool Var::requires_grad() const { return tape_ != nullptr && tape_->requires_grad(id_); }

Var Tape::leaf(Tensor value) {
  require(value.all_finite(), ErrorKind::kNumeric, "non-finite value in leaf tensor");
  nodes_.push_back({"leaf", std::move(value), true, {}, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  require(value.all_finite(), ErrorKind::kNumeric, "non-finite value in constant tensor");
  nodes_.push_back({"constant", std::move(value), false, {}, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::detach(Var v) { return constant(v.value()); }

Var Tape::record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) {
    fail(ErrorKind::kNumeric, std::string("non-finite value produced by ") + op);
  }
  bool needs_grad = false;
  std::vector<std::size_t> ids;
  ids.reserve(inputs.size());
  for (const Var& in : inputs) {
    require(in.tape() == this, ErrorKind::kInvalidArgument,
            std::string(op) + ": input recorded on a different tape");
    needs_grad = needs_grad || nodes_[in.id()].requires_grad;
    ids.push_back(in.id());
  }
  nodes_.push_back({op, std::move(value), needs_grad, std::move(ids),
                    needs_grad ? std::move(backward) : BackwardFn{}});
  return Var(this, nodes_.size() - 1);
}

std::vector<Tensor> Tape::backward(Var loss, std::span<const Var> wrt) {
  require(loss.tape() == this, ErrorKind::kInvalidArgument, "backward: loss from another tape");
  require(loss.value().numel() == 1, ErrorKind::kDimensionMismatch,
          "backward: loss must be a scalar, got " + shape_str(loss.shape()));

  std::vector<Tensor> grads(loss.id() + 1);
  grads[loss.id()] = Tensor(loss.shape(), 1.0);

  std::vector<const Tensor*> in_values;
  std::vector<Tensor*> in_grads;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || !node.backward || grads[i].numel() == 0) continue;
    in_values.clear();
    in_grads.clear();
    for (std::size_t in : node.inputs) {
      in_values.push_back(&nodes_[in].value);
      if (nodes_[in].requires_grad) {
        if (grads[in].numel() == 0) grads[in] = Tensor::zeros_like(nodes_[in].value);
        in_grads.push_back(&grads[in]);
      } else {
        in_grads.push_back(nullptr);
      }
    }
    node.backward(BackwardArgs{node.value, grads[i], in_values, in_grads});
    for (Tensor* g : in_grads) {
      if (g != nullptr && !g->all_finite()) {
        fail(ErrorKind::kNumeric, std::string("NaN/Inf gradient during backward of ") + node.op);
      }
    }
  }

  std::vector<Tensor> out;
  out.reserve(wrt.size());
  for (const Var& p : wrt) {
    require(p.tape() == this, ErrorKind::kInvalidArgument, "backward: parameter from another tape");
    if (p.id() < grads.size() && grads[p.id()].numel() != 0) {
      out.push_back(grads[p.id()]);
    } else {
      out.push_back(Tensor::zeros_like(p.value()));
    }
  }
  return out;
}

}  // namespace rg::num
