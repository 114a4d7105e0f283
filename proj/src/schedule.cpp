#include "anylr/schedule.hpp"

#include <cmath>

#include "anylr/errors.hpp"
#include "anylr/format.hpp"
#include "anylr/summation.hpp"

namespace anylr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Schedule Schedule::constant(double base_lr) {
  Schedule s;
  s.kind = ScheduleKind::Constant;
  s.base_lr = base_lr;
  s.validate();
  return s;
}

Schedule Schedule::poly_decay(double base_lr, double gamma) {
  Schedule s;
  s.kind = ScheduleKind::PolyDecay;
  s.base_lr = base_lr;
  s.gamma = gamma;
  s.validate();
  return s;
}

Schedule Schedule::sqrt_alpha(double base_lr, double alpha) {
  Schedule s;
  s.kind = ScheduleKind::SqrtAlpha;
  s.base_lr = base_lr;
  s.alpha = alpha;
  s.validate();
  return s;
}

Schedule Schedule::cosine(double base_lr, long horizon, double warmup_frac,
                          double floor_frac) {
  Schedule s;
  s.kind = ScheduleKind::Cosine;
  s.base_lr = base_lr;
  s.horizon = horizon;
  s.warmup_frac = warmup_frac;
  s.floor_frac = floor_frac;
  s.validate();
  return s;
}

Schedule Schedule::wsd(double base_lr, long horizon, double decay_start_frac,
                       double floor_frac) {
  Schedule s;
  s.kind = ScheduleKind::Wsd;
  s.base_lr = base_lr;
  s.horizon = horizon;
  s.decay_start_frac = decay_start_frac;
  s.floor_frac = floor_frac;
  s.validate();
  return s;
}

Schedule Schedule::linear_decay(double base_lr, long horizon,
                                double floor_frac) {
  Schedule s;
  s.kind = ScheduleKind::LinearDecay;
  s.base_lr = base_lr;
  s.horizon = horizon;
  s.floor_frac = floor_frac;
  s.validate();
  return s;
}

bool Schedule::horizon_dependent() const {
  switch (kind) {
    case ScheduleKind::Cosine:
    case ScheduleKind::Wsd:
    case ScheduleKind::LinearDecay:
      return true;
    default:
      return false;
  }
}

void Schedule::validate() const {
  if (!(base_lr > 0.0))
    throw ConfigError("schedule: base_lr must be > 0, got " + fmt_g(base_lr));
  switch (kind) {
    case ScheduleKind::Constant:
      break;
    case ScheduleKind::PolyDecay:
      if (!(gamma > 0.0 && gamma < 1.0))
        throw ConfigError("schedule: poly_decay gamma must lie in (0,1), got " +
                          fmt_g(gamma));
      break;
    case ScheduleKind::SqrtAlpha:
      if (!(alpha > 0.0))
        throw ConfigError("schedule: sqrt_alpha alpha must be > 0, got " +
                          fmt_g(alpha));
      break;
    case ScheduleKind::Cosine:
      if (horizon < 1)
        throw ConfigError("schedule: cosine horizon must be >= 1");
      if (!(warmup_frac >= 0.0 && warmup_frac < 1.0))
        throw ConfigError("schedule: warmup_frac must lie in [0,1), got " +
                          fmt_g(warmup_frac));
      break;
    case ScheduleKind::Wsd:
      if (horizon < 1) throw ConfigError("schedule: wsd horizon must be >= 1");
      if (!(decay_start_frac > 0.0 && decay_start_frac < 1.0))
        throw ConfigError(
            "schedule: wsd decay_start_frac must lie in (0,1), got " +
            fmt_g(decay_start_frac));
      break;
    case ScheduleKind::LinearDecay:
      if (horizon < 1)
        throw ConfigError("schedule: linear_decay horizon must be >= 1");
      break;
  }
  if (!(floor_frac >= 0.0 && floor_frac <= 1.0))
    throw ConfigError("schedule: floor_frac must lie in [0,1], got " +
                      fmt_g(floor_frac));
}

double Schedule::lr_at(long t) const {
  if (t < 1)
    throw ConfigError("schedule: step must be >= 1, got " + std::to_string(t));
  if (horizon_dependent() && t > horizon)
    throw ConfigError("schedule: step " + std::to_string(t) +
                      " exceeds horizon " + std::to_string(horizon) + " of " +
                      label());
  double td = static_cast<double>(t);
  switch (kind) {
    case ScheduleKind::Constant:
      return base_lr;
    case ScheduleKind::PolyDecay:
      return base_lr * std::pow(td, -gamma);
    case ScheduleKind::SqrtAlpha:
      return base_lr * std::sqrt(alpha / (td + alpha));
    case ScheduleKind::LinearDecay: {
      double ramp = 1.0 - td / static_cast<double>(horizon) * (1.0 - floor_frac);
      return base_lr * std::max(floor_frac, ramp);
    }
    case ScheduleKind::Cosine: {
      double T = static_cast<double>(horizon);
      double W = warmup_frac * T;
      if (td <= W) return base_lr * td / W;
      double phase = kPi * (td - W) / (T - W);
      return base_lr *
             (floor_frac + (1.0 - floor_frac) * 0.5 * (1.0 + std::cos(phase)));
    }
    case ScheduleKind::Wsd: {
      double T = static_cast<double>(horizon);
      double t0 = decay_start_frac * T;
      if (td <= t0) return base_lr;
      return base_lr * (1.0 - (1.0 - floor_frac) * (td - t0) / (T - t0));
    }
  }
  return 0.0;  // unreachable
}

double Schedule::cumulative_lr(long t_from, long t_to) const {
  if (t_from < 1 || t_from > t_to)
    throw ConfigError("schedule: bad cumulative range [" +
                      std::to_string(t_from) + "," + std::to_string(t_to) +
                      "]");
  CompensatedSum acc;
  for (long t = t_from; t <= t_to; ++t) acc.add(lr_at(t));
  return acc.value();
}

std::string Schedule::label() const {
  switch (kind) {
    case ScheduleKind::Constant:
      return "constant(eta=" + fmt_g(base_lr) + ")";
    case ScheduleKind::PolyDecay:
      return "poly_decay(eta=" + fmt_g(base_lr) + ",gamma=" + fmt_g(gamma) +
             ")";
    case ScheduleKind::SqrtAlpha:
      return "sqrt_alpha(eta=" + fmt_g(base_lr) + ",alpha=" + fmt_g(alpha) +
             ")";
    case ScheduleKind::Cosine: {
      std::string s =
          "cosine(eta=" + fmt_g(base_lr) + ",T=" + std::to_string(horizon);
      if (warmup_frac > 0.0) s += ",warmup=" + fmt_g(warmup_frac);
      if (floor_frac > 0.0) s += ",floor=" + fmt_g(floor_frac);
      return s + ")";
    }
    case ScheduleKind::Wsd: {
      std::string s = "wsd(eta=" + fmt_g(base_lr) +
                      ",T=" + std::to_string(horizon) +
                      ",rho=" + fmt_g(decay_start_frac);
      if (floor_frac > 0.0) s += ",floor=" + fmt_g(floor_frac);
      return s + ")";
    }
    case ScheduleKind::LinearDecay: {
      std::string s =
          "linear_decay(eta=" + fmt_g(base_lr) + ",T=" + std::to_string(horizon);
      if (floor_frac > 0.0) s += ",floor=" + fmt_g(floor_frac);
      return s + ")";
    }
  }
  return "?";
}

std::vector<double> averaged_constant_weights(double eta, long n) {
  if (!(eta > 0.0 && eta < 1.0))
    throw ConfigError("equivalent_schedule: eta must lie in (0,1), got " +
                      fmt_g(eta));
  if (n < 1) throw ConfigError("equivalent_schedule: n must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (long k = 1; k <= n; ++k)
    w[static_cast<std::size_t>(k - 1)] =
        (1.0 - std::pow(1.0 - eta, static_cast<double>(n - k))) /
        static_cast<double>(n);
  return w;
}

std::vector<double> derived_equivalent_schedule(double eta, long n) {
  std::vector<double> w = averaged_constant_weights(eta, n);
  // Solving lr_k * prod_{s>k}(1 - lr_s) = w_k backward gives
  // lr_t = w_t / (1 - sum_{k>t} w_k); the suffix sum equals the remaining
  // final-iterate mass prod_{s>t}(1 - lr_s).
  std::vector<double> lrs(w.size());
  double suffix = 0.0;
  for (long t = n; t >= 1; --t) {
    std::size_t i = static_cast<std::size_t>(t - 1);
    double denom = 1.0 - suffix;
    if (!(denom > 0.0))
      throw std::logic_error(
          "equivalent_schedule: nonpositive weight denominator at n=" +
          std::to_string(n) + " eta=" + fmt_g(eta) + " t=" + std::to_string(t));
    lrs[i] = w[i] / denom;
    suffix += w[i];
  }
  return lrs;
}

std::vector<double> final_iterate_weights(const std::vector<double>& lrs) {
  std::vector<double> a(lrs.size());
  double tail_prod = 1.0;  // prod over s > k of (1 - lr_s)
  for (std::size_t k = lrs.size(); k-- > 0;) {
    a[k] = lrs[k] * tail_prod;
    tail_prod *= 1.0 - lrs[k];
  }
  return a;
}

}  // namespace anylr
