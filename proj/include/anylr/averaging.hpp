#pragma once

#include <span>
#include <string>
#include <vector>

#include "anylr/problem.hpp"

namespace anylr {

enum class AveragingKind { None, TailFraction, TailFromStep, Ema };

// Whether the EMA absorbs the iterate before or after the SGD step that
// shares its step index. after_step is the default and what the exact
// closure below documents.
enum class EmaUpdateOrder { BeforeStep, AfterStep };

struct AveragingConfig {
  AveragingKind kind = AveragingKind::None;
  double fraction = 1.0;        // TailFraction: trailing window share, (0,1]
  long start_step = 1;          // TailFromStep: first step in the window
  double half_life_frac = 0.0;  // Ema: f; f = 0 follows the last iterate
  EmaUpdateOrder order = EmaUpdateOrder::AfterStep;

  static AveragingConfig none();
  static AveragingConfig tail_fraction(double f);
  static AveragingConfig tail_from_step(long s);
  static AveragingConfig ema(double f,
                             EmaUpdateOrder order = EmaUpdateOrder::AfterStep);

  std::string label() const;
  void validate() const;  // throws ConfigError
};

// Retention (weight on the old average) of the EMA whose half-life is t/f:
// rho_t = (1/2)^(f/t). The f = 0 bypass (last iterate) is dispatched on the
// config kind, never through this formula.
double ema_retention(double f, long t);

// Trailing-window length at a checkpoint: max(1, round(f * c)).
long tail_window_length(double fraction, long checkpoint);

// One coupled update of the exact (v, c) closure for an EMA of iterates:
// v_k = E[(wbar - w*)_k^2], c_k = E[(w - w*)(wbar - w*)]_k. The fresh sample
// is independent of (w, wbar), so the SGD step propagates the cross term as
// c_k *= (1 - lr*lam_k); the EMA merge with retention rho then gives
//   v' = rho^2 v + 2 rho (1-rho) c + (1-rho)^2 m_new,   c' = rho c + (1-rho) m_new.
void step_ema_moments(std::span<const double> m_new, std::vector<double>& v,
                      std::vector<double>& c, const Spectrum& spectrum,
                      double lr, double retention);

// Stateful wrapper driving the closure alongside a trajectory. Call order
// per SGD step t:
//   BeforeStep: absorb(m_before, t); <recursion step>; contract(lr)
//   AfterStep:  <recursion step>; contract(lr); absorb(m_after, t)
// Initialized with wbar_0 = w_0, hence v = c = m0.
class EmaMomentTracker {
 public:
  EmaMomentTracker(const Spectrum& spectrum, double half_life_frac,
                   EmaUpdateOrder order);

  EmaUpdateOrder order() const { return order_; }
  void contract(double lr);
  void absorb(std::span<const double> m, long t);
  double averaged_risk() const;
  const std::vector<double>& v() const { return v_; }
  const std::vector<double>& c() const { return c_; }

 private:
  const Spectrum* spectrum_;
  double f_;
  EmaUpdateOrder order_;
  std::vector<double> v_, c_;
};

// Exact risk of the uniform average over a trailing window, maintained
// online: A <- (1 - lr*lam) A + m after each in-window step, and
//   risk over [start, t] = (1/(2 T^2)) * lambda . (2*sum A - sum m).
// end_step < 0 leaves the window open so the average can be read at every
// checkpoint of a whole-run average.
class TailWindowTracker {
 public:
  TailWindowTracker(const Spectrum& spectrum, long start_step,
                    long end_step = -1);

  void observe(std::span<const double> m, double lr, long t);
  bool covers(long t) const;
  double averaged_risk(long t) const;

 private:
  const Spectrum* spectrum_;
  long start_, end_;
  long seen_ = 0;
  std::vector<double> acc_, sum_acc_, sum_m_;
};

// Direct evaluation of the same quantity from a stored window of moments.
// lr_window[i] is the step size of the step that produced m_window[i];
// entry 0 is not used (no contraction happens before the first element).
double tail_average_risk(const std::vector<std::vector<double>>& m_window,
                         const std::vector<double>& lr_window,
                         const Spectrum& spectrum);

}  // namespace anylr
