#include "anylr/averaging.hpp"

#include <cmath>
#include <stdexcept>

#include "anylr/errors.hpp"
#include "anylr/format.hpp"
#include "anylr/summation.hpp"

namespace anylr {

AveragingConfig AveragingConfig::none() { return {}; }

AveragingConfig AveragingConfig::tail_fraction(double f) {
  AveragingConfig c;
  c.kind = AveragingKind::TailFraction;
  c.fraction = f;
  c.validate();
  return c;
}

AveragingConfig AveragingConfig::tail_from_step(long s) {
  AveragingConfig c;
  c.kind = AveragingKind::TailFromStep;
  c.start_step = s;
  c.validate();
  return c;
}

AveragingConfig AveragingConfig::ema(double f, EmaUpdateOrder order) {
  AveragingConfig c;
  c.kind = AveragingKind::Ema;
  c.half_life_frac = f;
  c.order = order;
  c.validate();
  return c;
}

void AveragingConfig::validate() const {
  switch (kind) {
    case AveragingKind::None:
      break;
    case AveragingKind::TailFraction:
      if (!(fraction > 0.0 && fraction <= 1.0))
        throw ConfigError("averaging: tail fraction must lie in (0,1], got " +
                          fmt_g(fraction));
      break;
    case AveragingKind::TailFromStep:
      if (start_step < 0)
        throw ConfigError("averaging: tail start step must be >= 0, got " +
                          std::to_string(start_step));
      break;
    case AveragingKind::Ema:
      if (!(half_life_frac >= 0.0))
        throw ConfigError("averaging: ema half-life fraction must be >= 0, got " +
                          fmt_g(half_life_frac));
      break;
  }
}

std::string AveragingConfig::label() const {
  switch (kind) {
    case AveragingKind::None:
      return "none";
    case AveragingKind::TailFraction:
      return "tail_f" + fmt_g(fraction);
    case AveragingKind::TailFromStep:
      return "tail_from" + std::to_string(start_step);
    case AveragingKind::Ema: {
      std::string s = "ema_f" + fmt_g(half_life_frac);
      if (order == EmaUpdateOrder::BeforeStep) s += "_pre";
      return s;
    }
  }
  return "?";
}

double ema_retention(double f, long t) {
  if (!(f >= 0.0))
    throw ConfigError("averaging: ema half-life fraction must be >= 0, got " +
                      fmt_g(f));
  if (t < 1)
    throw ConfigError("averaging: retention step must be >= 1, got " +
                      std::to_string(t));
  return std::pow(0.5, f / static_cast<double>(t));
}

long tail_window_length(double fraction, long checkpoint) {
  long len = static_cast<long>(
      std::floor(fraction * static_cast<double>(checkpoint) + 0.5));
  return len < 1 ? 1 : len;
}

namespace {

void ema_contract(std::vector<double>& c, const Spectrum& spectrum, double lr) {
  const double* lam = spectrum.eigenvalues.data();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= 1.0 - lr * lam[k];
}

void ema_absorb(std::span<const double> m, std::vector<double>& v,
                std::vector<double>& c, double rho) {
  const double keep2 = rho * rho;
  const double cross = 2.0 * rho * (1.0 - rho);
  const double fresh2 = (1.0 - rho) * (1.0 - rho);
  const double fresh = 1.0 - rho;
  for (std::size_t k = 0; k < v.size(); ++k) {
    double vk = keep2 * v[k] + cross * c[k] + fresh2 * m[k];
    if (vk < -1e-14)
      throw std::logic_error("averaging: ema variance went negative (" +
                             fmt_g(vk) + ")");
    v[k] = vk;
    c[k] = rho * c[k] + fresh * m[k];
  }
}

}  // namespace

void step_ema_moments(std::span<const double> m_new, std::vector<double>& v,
                      std::vector<double>& c, const Spectrum& spectrum,
                      double lr, double retention) {
  if (v.size() != spectrum.dim() || c.size() != spectrum.dim() ||
      m_new.size() != spectrum.dim())
    throw ConfigError("averaging: dimension mismatch in ema update");
  if (!(retention >= 0.0 && retention <= 1.0))
    throw ConfigError("averaging: retention must lie in [0,1], got " +
                      fmt_g(retention));
  ema_contract(c, spectrum, lr);
  ema_absorb(m_new, v, c, retention);
}

EmaMomentTracker::EmaMomentTracker(const Spectrum& spectrum,
                                   double half_life_frac, EmaUpdateOrder order)
    : spectrum_(&spectrum),
      f_(half_life_frac),
      order_(order),
      v_(spectrum.target_m0),
      c_(spectrum.target_m0) {
  if (!(f_ >= 0.0))
    throw ConfigError("averaging: ema half-life fraction must be >= 0");
}

void EmaMomentTracker::contract(double lr) { ema_contract(c_, *spectrum_, lr); }

void EmaMomentTracker::absorb(std::span<const double> m, long t) {
  // f = 0 is the last-iterate bypass: retention 0 pins the average to the
  // absorbed iterate instead of the frozen (1/2)^(0/t) = 1 the formula gives.
  double rho = f_ == 0.0 ? 0.0 : ema_retention(f_, t);
  ema_absorb(m, v_, c_, rho);
}

double EmaMomentTracker::averaged_risk() const {
  return 0.5 * pairwise_dot(spectrum_->eigenvalues, v_);
}

TailWindowTracker::TailWindowTracker(const Spectrum& spectrum, long start_step,
                                     long end_step)
    : spectrum_(&spectrum),
      start_(start_step),
      end_(end_step),
      acc_(spectrum.dim(), 0.0),
      sum_acc_(spectrum.dim(), 0.0),
      sum_m_(spectrum.dim(), 0.0) {
  if (start_ < 1) throw ConfigError("averaging: window start must be >= 1");
  if (end_ >= 0 && end_ < start_)
    throw ConfigError("averaging: window end precedes start");
}

void TailWindowTracker::observe(std::span<const double> m, double lr, long t) {
  seen_ = t;
  if (t < start_ || (end_ >= 0 && t > end_)) return;
  const double* lam = spectrum_->eigenvalues.data();
  for (std::size_t k = 0; k < acc_.size(); ++k) {
    double a = (1.0 - lr * lam[k]) * acc_[k] + m[k];
    acc_[k] = a;
    sum_acc_[k] += a;
    sum_m_[k] += m[k];
  }
}

bool TailWindowTracker::covers(long t) const {
  return t >= start_ && (end_ < 0 || t <= end_);
}

double TailWindowTracker::averaged_risk(long t) const {
  if (!covers(t) || t > seen_)
    throw ConfigError("averaging: window [" + std::to_string(start_) + "," +
                      (end_ < 0 ? std::string("inf") : std::to_string(end_)) +
                      "] cannot be read at step " + std::to_string(t));
  double T = static_cast<double>(t - start_ + 1);
  std::vector<double> cross(acc_.size());
  for (std::size_t k = 0; k < cross.size(); ++k)
    cross[k] = 2.0 * sum_acc_[k] - sum_m_[k];
  return 0.5 / (T * T) * pairwise_dot(spectrum_->eigenvalues, cross);
}

double tail_average_risk(const std::vector<std::vector<double>>& m_window,
                         const std::vector<double>& lr_window,
                         const Spectrum& spectrum) {
  const std::size_t T = m_window.size();
  if (T == 0) throw ConfigError("averaging: empty window");
  if (lr_window.size() != T)
    throw ConfigError("averaging: window and step-size lengths differ");
  const std::size_t d = spectrum.dim();
  std::vector<double> acc(d, 0.0), sum_acc(d, 0.0), sum_m(d, 0.0);
  for (std::size_t i = 0; i < T; ++i) {
    if (m_window[i].size() != d)
      throw ConfigError("averaging: window entry dimension mismatch");
    for (std::size_t k = 0; k < d; ++k) {
      double decay = i == 0 ? 0.0 : 1.0 - lr_window[i] * spectrum.eigenvalues[k];
      double a = decay * acc[k] + m_window[i][k];
      acc[k] = a;
      sum_acc[k] += a;
      sum_m[k] += m_window[i][k];
    }
  }
  std::vector<double> cross(d);
  for (std::size_t k = 0; k < d; ++k) cross[k] = 2.0 * sum_acc[k] - sum_m[k];
  double Td = static_cast<double>(T);
  return 0.5 / (Td * Td) * pairwise_dot(spectrum.eigenvalues, cross);
}

}  // namespace anylr
