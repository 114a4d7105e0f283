#pragma once

#include <string>
#include <vector>

namespace anylr {

enum class ScheduleKind { Constant, PolyDecay, SqrtAlpha, Cosine, Wsd, LinearDecay };

// Step sizes are 1-indexed: lr_at(1) is the rate of the first update.
// Cosine, Wsd and LinearDecay need their horizon to evaluate and refuse
// steps past it; the horizon_dependent flag is the operational meaning of
// "anytime" in this codebase.
struct Schedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double base_lr = 0.0;
  double gamma = 0.0;             // PolyDecay exponent, in (0,1)
  double alpha = 0.0;             // SqrtAlpha shift, > 0
  long horizon = 0;               // T for horizon-bearing kinds
  double warmup_frac = 0.0;       // Cosine linear warmup, in [0,1)
  double floor_frac = 0.0;        // terminal lr as fraction of base, in [0,1]
  double decay_start_frac = 0.0;  // Wsd: constant until this fraction of T

  static Schedule constant(double base_lr);
  static Schedule poly_decay(double base_lr, double gamma);
  static Schedule sqrt_alpha(double base_lr, double alpha);
  static Schedule cosine(double base_lr, long horizon, double warmup_frac = 0.0,
                         double floor_frac = 0.0);
  static Schedule wsd(double base_lr, long horizon, double decay_start_frac,
                      double floor_frac = 0.0);
  static Schedule linear_decay(double base_lr, long horizon,
                               double floor_frac = 0.0);

  bool horizon_dependent() const;
  double lr_at(long t) const;
  // Exact compensated sum of lr over [t_from, t_to], both ends included.
  double cumulative_lr(long t_from, long t_to) const;
  std::string label() const;
  void validate() const;  // throws ConfigError
};

// Step-size table (1-indexed as entries 0..n-1) of the decaying schedule
// whose final iterate of w_t = (1-lr_t) w_{t-1} + lr_t x_t reproduces, with
// identical sample weights, the uniform average over w_0..w_{n-1} of a
// constant-eta run of the same scalar recursion.
std::vector<double> derived_equivalent_schedule(double eta, long n);

// Sample weights of that uniform average: a~_k = (1-(1-eta)^(n-k))/n.
std::vector<double> averaged_constant_weights(double eta, long n);

// Weight the final iterate places on sample x_k: lr_k * prod_{s>k}(1-lr_s).
std::vector<double> final_iterate_weights(const std::vector<double>& lrs);

}  // namespace anylr
