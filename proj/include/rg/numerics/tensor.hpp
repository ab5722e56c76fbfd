#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rg::num {

using Scalar = double;
using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major array of Scalars. A value type: copies are deep.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Scalar fill = 0.0);
  Tensor(Shape shape, std::vector<Scalar> data);

  static Tensor scalar(Scalar v) { return Tensor({1}, {v}); }
  static Tensor row(std::vector<Scalar> data);
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }

  const Shape& shape() const { return shape_; }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }

  // Rows/cols for the 2-D view used by the dense layers; a 1-D tensor is a
  // single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<Scalar> data() { return data_; }
  std::span<const Scalar> data() const { return data_; }
  std::vector<Scalar>& storage() { return data_; }
  const std::vector<Scalar>& storage() const { return data_; }

  Scalar& operator[](std::size_t i) { return data_[i]; }
  Scalar operator[](std::size_t i) const { return data_[i]; }
  Scalar& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const Scalar& at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  Scalar item() const;
  bool all_finite() const;
  Tensor reshaped(Shape shape) const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<Scalar> data_;
};

// Bit-level equality (distinguishes -0.0 from 0.0, NaN payloads).
bool bit_equal(const Tensor& a, const Tensor& b);

}  // namespace rg::num
