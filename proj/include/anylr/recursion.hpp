#pragma once

#include <atomic>
#include <span>
#include <vector>

#include "anylr/problem.hpp"
#include "anylr/schedule.hpp"

namespace anylr {

// Second moments of the iterate error in the eigenbasis: m[k] approximates
// nothing, it IS E[(w_t - w*)_k^2] exactly under Gaussian design.
struct MomentState {
  long step = 0;
  std::vector<double> m;
};

// Reference one-step update: with r = lambda . m computed first,
//   m'_k = (1 - 2*lr*lam_k + 2*lr^2*lam_k^2) m_k + lr^2*lam_k*(r + sigma^2).
// Kept simple for oracle checks; MomentRecursion below is the fast engine.
MomentState step_moments(const MomentState& state, const Spectrum& spectrum,
                         double lr, double noise_var);

// 0.5 * lambda . m; the sigma^2/2 offset is excluded everywhere.
double excess_risk(const MomentState& state, const Spectrum& spectrum);

// Evolves the diagonal moment recursion with a fused update + reduction pass.
// The reduction tree (4096-wide sequential blocks, pairwise over block sums)
// is fixed, so trajectories are bit-reproducible regardless of threading
// outside this class. Copyable: a copy is an independent branch of the
// trajectory (used by the WSD branch evaluator).
class MomentRecursion {
 public:
  // spectrum must outlive the object. coupling_scale multiplies the
  // lr^2*lam*(r + sigma^2) term; anything other than 1.0 deliberately
  // breaks the dynamics (negative-control hook for the validation suite).
  MomentRecursion(const Spectrum& spectrum, double noise_var,
                  double coupling_scale = 1.0);

  void step(double lr);  // throws DivergenceError on non-finite risk
  long current_step() const { return step_; }
  double excess_risk() const { return 0.5 * r_; }
  double weighted_moment_sum() const { return r_; }
  const std::vector<double>& moments() const { return m_; }
  const Spectrum& spectrum() const { return *spectrum_; }

  // Process-wide count of step() calls; lets tests verify how many trajectory
  // steps an evaluation strategy actually spent.
  static long total_steps() {
    return total_steps_.load(std::memory_order_relaxed);
  }

 private:
  double reduce() const;

  const Spectrum* spectrum_;
  double noise_var_;
  double coupling_scale_;
  std::vector<double> m_;
  mutable std::vector<double> block_sums_;
  double r_ = 0.0;
  long step_ = 0;

  static std::atomic<long> total_steps_;
};

// Largest empirically stable base rate for the schedule family: bisection
// (12 rounds) on a 500-step probe run; divergence means non-finite risk or
// growth beyond 1e6x the initial risk. Returns ~0 when nothing is stable.
double stability_threshold(const ProblemSpec& spec, const Schedule& pattern);

}  // namespace anylr
