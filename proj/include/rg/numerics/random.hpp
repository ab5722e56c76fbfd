#pragma once

#include <cstdint>
#include <string_view>

#include "rg/numerics/tensor.hpp"

namespace rg::num {

// Counter-based random stream: the i-th draw is a pure function of (key, i),
// so results never depend on platform distributions. split() derives an
// independent child stream from a name or an index.
class Stream {
 public:
  explicit Stream(std::uint64_t seed = 0);

  Stream split(std::string_view name) const;
  Stream split(std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  // Standard normal via Box-Muller; consumes two draws.
  double normal();

  Tensor normal_tensor(Shape shape);
  Tensor uniform_tensor(Shape shape, double lo, double hi);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  Stream(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace rg::num
