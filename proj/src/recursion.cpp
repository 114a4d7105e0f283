#include "anylr/recursion.hpp"

#include <cmath>

#include "anylr/errors.hpp"
#include "anylr/format.hpp"
#include "anylr/summation.hpp"

namespace anylr {

namespace {
constexpr std::size_t kBlock = 4096;
}

std::atomic<long> MomentRecursion::total_steps_{0};

MomentState step_moments(const MomentState& state, const Spectrum& spectrum,
                         double lr, double noise_var) {
  const std::size_t d = spectrum.dim();
  if (state.m.size() != d)
    throw ConfigError("recursion: state dimension " +
                      std::to_string(state.m.size()) +
                      " does not match spectrum dimension " +
                      std::to_string(d));
  if (!(lr >= 0.0))
    throw ConfigError("recursion: step size must be >= 0, got " + fmt_g(lr));

  CompensatedSum r;
  for (std::size_t k = 0; k < d; ++k)
    r.add(spectrum.eigenvalues[k] * state.m[k]);
  const double inject = lr * lr * (r.value() + noise_var);

  MomentState next;
  next.step = state.step + 1;
  next.m.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    double lam = spectrum.eigenvalues[k];
    double x = lr * lam;
    double mk = (1.0 - 2.0 * x + 2.0 * x * x) * state.m[k] + inject * lam;
    if (!std::isfinite(mk))
      throw DivergenceError("recursion: non-finite moment at step " +
                                std::to_string(next.step) +
                                " (step size too large)",
                            next.step);
    next.m[k] = mk;
  }
  return next;
}

double excess_risk(const MomentState& state, const Spectrum& spectrum) {
  if (state.m.size() != spectrum.dim())
    throw ConfigError("recursion: state dimension does not match spectrum");
  return 0.5 * pairwise_dot(spectrum.eigenvalues, state.m);
}

MomentRecursion::MomentRecursion(const Spectrum& spectrum, double noise_var,
                                 double coupling_scale)
    : spectrum_(&spectrum),
      noise_var_(noise_var),
      coupling_scale_(coupling_scale),
      m_(spectrum.target_m0),
      block_sums_((spectrum.dim() + kBlock - 1) / kBlock) {
  r_ = reduce();
}

double MomentRecursion::reduce() const {
  const double* lam = spectrum_->eigenvalues.data();
  const double* m = m_.data();
  const std::size_t d = m_.size();
  std::size_t nb = 0;
  for (std::size_t base = 0; base < d; base += kBlock) {
    std::size_t end = std::min(base + kBlock, d);
    double acc = 0.0;
    for (std::size_t k = base; k < end; ++k) acc += lam[k] * m[k];
    block_sums_[nb++] = acc;
  }
  return pairwise_sum({block_sums_.data(), nb});
}

void MomentRecursion::step(double lr) {
  const double* lam = spectrum_->eigenvalues.data();
  double* m = m_.data();
  const std::size_t d = m_.size();
  const double inject = lr * lr * (r_ + noise_var_) * coupling_scale_;

  std::size_t nb = 0;
  for (std::size_t base = 0; base < d; base += kBlock) {
    std::size_t end = std::min(base + kBlock, d);
    double acc = 0.0;
    for (std::size_t k = base; k < end; ++k) {
      double x = lr * lam[k];
      double mk = m[k];
      mk += 2.0 * x * (x - 1.0) * mk + inject * lam[k];
      m[k] = mk;
      acc += lam[k] * mk;
    }
    block_sums_[nb++] = acc;
  }
  r_ = pairwise_sum({block_sums_.data(), nb});
  ++step_;
  total_steps_.fetch_add(1, std::memory_order_relaxed);
  if (!std::isfinite(r_))
    throw DivergenceError("recursion: risk diverged at step " +
                              std::to_string(step_) +
                              " (step size too large for this spectrum)",
                          step_);
}

double stability_threshold(const ProblemSpec& spec, const Schedule& pattern) {
  Spectrum spectrum = build_spectrum(spec);
  const long probe_steps = 500;

  auto stable = [&](double eta) {
    if (!(eta > 0.0)) return true;
    Schedule probe = pattern;
    probe.base_lr = eta;
    if (probe.horizon_dependent() && probe.horizon < probe_steps)
      probe.horizon = probe_steps;
    MomentRecursion rec(spectrum, spec.noise_var);
    double initial = rec.excess_risk();
    double cap = 1e6 * (initial > 0.0 ? initial : 1.0);
    try {
      for (long t = 1; t <= probe_steps; ++t) {
        rec.step(probe.lr_at(t));
        if (rec.excess_risk() > cap) return false;
      }
    } catch (const DivergenceError&) {
      return false;
    }
    return true;
  };

  double hi = 2.0 / spectrum.eigenvalues[0];
  int doublings = 0;
  while (stable(hi) && doublings < 10) {
    hi *= 2.0;
    ++doublings;
  }
  if (doublings == 10) return hi;  // nothing in range diverges
  double lo = 0.0;
  for (int i = 0; i < 12; ++i) {
    double mid = 0.5 * (lo + hi);
    if (stable(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace anylr
