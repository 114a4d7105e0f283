#include "anylr/summation.hpp"

#include <cstddef>

namespace anylr {
namespace {

constexpr std::size_t kLeaf = 64;

double sum_range(const double* p, std::size_t n) {
  if (n <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  std::size_t h = n / 2;
  return sum_range(p, h) + sum_range(p + h, n - h);
}

double dot_range(const double* a, const double* b, std::size_t n) {
  if (n <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  std::size_t h = n / 2;
  return dot_range(a, b, h) + dot_range(a + h, b + h, n - h);
}

}  // namespace

double pairwise_sum(std::span<const double> v) {
  return sum_range(v.data(), v.size());
}

double pairwise_dot(std::span<const double> a, std::span<const double> b) {
  return dot_range(a.data(), b.data(), a.size());
}

}  // namespace anylr
