#pragma once

#include <cmath>
#include <span>

namespace anylr {

// Pairwise (cascade) reductions with a fixed tree, so a given input length
// always reduces in the same order. Error grows O(log n) rather than O(n).
double pairwise_sum(std::span<const double> v);
double pairwise_dot(std::span<const double> a, std::span<const double> b);

// Neumaier-compensated running sum for long sequential accumulations.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace anylr
