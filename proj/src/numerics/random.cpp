#include "rg/numerics/random.hpp"

#include <cmath>
#include <numbers>

#include "rg/error.hpp"

namespace rg::num {
namespace {

// MurmurHash3 / SplitMix64 finalizer.
std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Stream::Stream(std::uint64_t seed) : key_(fmix64(seed ^ 0x5851f42d4c957f2dULL)), counter_(0) {}

Stream Stream::split(std::string_view name) const {
  return Stream(fmix64(key_ ^ fmix64(fnv1a(name) + 0x9e3779b97f4a7c15ULL)), 0);
}

Stream Stream::split(std::uint64_t index) const {
  return Stream(fmix64(key_ + fmix64(index ^ 0xd1b54a32d192ed03ULL)), 0);
}

std::uint64_t Stream::next_u64() {
  return fmix64(key_ ^ fmix64(counter_++ + 0x9e3779b97f4a7c15ULL));
}

double Stream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Stream::below(std::uint64_t n) {
  require(n > 0, ErrorKind::kInvalidArgument, "Stream::below: empty range");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

double Stream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Tensor Stream::normal_tensor(Shape shape) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = normal();
  return t;
}

Tensor Stream::uniform_tensor(Shape shape, double lo, double hi) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = lo + (hi - lo) * uniform();
  return t;
}

}  // namespace rg::num
