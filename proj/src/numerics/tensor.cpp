#include "rg/numerics/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "rg/error.hpp"

namespace rg::num {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

static void check_shape(const Shape& shape) {
  require(!shape.empty(), ErrorKind::kInvalidArgument, "tensor shape must be non-empty");
  for (std::size_t d : shape) {
    require(d > 0, ErrorKind::kInvalidArgument,
            "tensor dimensions must be positive: " + shape_str(shape));
  }
}

Tensor::Tensor(Shape shape, Scalar fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<Scalar> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  require(shape_numel(shape_) == data_.size(), ErrorKind::kDimensionMismatch,
          "tensor data length " + std::to_string(data_.size()) +
              " does not match shape " + shape_str(shape_));
}

Tensor Tensor::row(std::vector<Scalar> data) {
  const std::size_t n = data.size();
  return Tensor({1, n}, std::move(data));
}

std::size_t Tensor::rows() const { return shape_.size() == 1 ? 1 : shape_[0]; }

std::size_t Tensor::cols() const {
  return shape_.size() == 1 ? shape_[0] : data_.size() / shape_[0];
}

Scalar Tensor::item() const {
  require(data_.size() == 1, ErrorKind::kDimensionMismatch,
          "item() on non-scalar tensor " + shape_str(shape_));
  return data_[0];
}

bool Tensor::all_finite() const {
  for (Scalar v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(Scalar)) == 0;
}

}  // namespace rg::num
