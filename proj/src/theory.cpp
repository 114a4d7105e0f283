#include "anylr/theory.hpp"

#include <algorithm>
#include <cmath>

#include "anylr/errors.hpp"
#include "anylr/format.hpp"
#include "anylr/summation.hpp"

namespace anylr {

namespace {
void check_exponents(double capacity, double source) {
  if (!(capacity > 1.0))
    throw ConfigError("theory: capacity exponent a must be > 1, got " +
                      fmt_g(capacity));
  if (!(source > 1.0))
    throw ConfigError("theory: source exponent b must be > 1, got " +
                      fmt_g(source));
}
}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::BiasDominated:
      return "bias_dominated";
    case Regime::VarianceDominated:
      return "variance_dominated";
    default:
      return "balanced";
  }
}

double optimal_gamma(double capacity, double source) {
  check_exponents(capacity, source);
  return std::max(1.0 - capacity / source, 0.0);
}

double predicted_exponent(double capacity, double source) {
  check_exponents(capacity, source);
  if (source >= capacity) return 1.0 - 1.0 / source;
  return (source - 1.0) / capacity;
}

Regime dominant_regime(double capacity, double source) {
  check_exponents(capacity, source);
  if (source > capacity) return Regime::VarianceDominated;
  if (source < capacity) return Regime::BiasDominated;
  return Regime::Balanced;
}

long spectral_cutoff(const Spectrum& s, double eta, double gamma, long n) {
  if (n < 2) throw ConfigError("spectral_cutoff: n must be >= 2");
  if (!(eta > 0.0)) throw ConfigError("spectral_cutoff: eta must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw ConfigError("spectral_cutoff: gamma must lie in [0, 1], got " +
                      fmt_g(gamma));
  double threshold = std::log(static_cast<double>(n)) /
                     (eta * std::pow(static_cast<double>(n), 1.0 - gamma));
  // eigenvalues are nonincreasing, so the qualifying set is a prefix
  auto first_below =
      std::partition_point(s.eigenvalues.begin(), s.eigenvalues.end(),
                           [&](double lam) { return lam >= threshold; });
  return static_cast<long>(first_below - s.eigenvalues.begin());
}

long spectral_cutoff(const ProblemSpec& spec, double eta, double gamma,
                     long n) {
  return spectral_cutoff(build_spectrum(spec), eta, gamma, n);
}

RiskBound poly_decay_risk_bound(const Spectrum& s, double noise_var,
                                double eta, double gamma, long n) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ConfigError("poly_decay_risk_bound: gamma must lie in (0, 1), got " +
                      fmt_g(gamma));
  if (!(eta > 0.0) || eta > 1.0 / s.trace + 1e-12)
    throw ConfigError(
        "poly_decay_risk_bound: eta must lie in (0, 1/trace], got " +
        fmt_g(eta));
  if (!(noise_var >= 0.0))
    throw ConfigError("poly_decay_risk_bound: noise_var must be >= 0");
  long cut = spectral_cutoff(s, eta, gamma, n);
  double nd = static_cast<double>(n);

  CompensatedSum head_signal, tail_signal, tail_noise;
  for (long k = 0; k < static_cast<long>(s.dim()); ++k) {
    if (k < cut) {
      head_signal.add(s.signal[k]);
    } else {
      tail_signal.add(s.signal[k]);
      double lam = s.eigenvalues[k];
      tail_noise.add(eta * lam * lam * std::pow(nd, 1.0 - 2.0 * gamma) +
                     lam * std::pow(nd, -gamma));
    }
  }
  RiskBound b;
  b.bias = head_signal.value() / nd + tail_signal.value();
  b.variance = static_cast<double>(cut) * noise_var / (eta * nd) +
               noise_var * tail_noise.value();
  return b;
}

RiskBound poly_decay_risk_bound(const ProblemSpec& spec, double eta,
                                double gamma, long n) {
  return poly_decay_risk_bound(build_spectrum(spec), spec.noise_var, eta,
                               gamma, n);
}

RiskBound wsd_risk_bound(double capacity, double source, long n,
                         double noise_var) {
  if (!(capacity > 1.0 && capacity < 2.0))
    throw ConfigError(
        "wsd_risk_bound: requires capacity exponent a in (1, 2), got " +
        fmt_g(capacity));
  if (!(source > 1.0))
    throw ConfigError("wsd_risk_bound: source exponent b must be > 1, got " +
                      fmt_g(source));
  if (n < 1) throw ConfigError("wsd_risk_bound: n must be >= 1");
  if (!(noise_var >= 0.0))
    throw ConfigError("wsd_risk_bound: noise_var must be >= 0");
  double nd = static_cast<double>(n);
  RiskBound b;
  b.bias = std::pow(nd, -(source - 1.0) / capacity);
  b.variance = noise_var * std::pow(nd, -(capacity - 1.0) / capacity);
  return b;
}

RatePrediction rate_prediction(const ProblemSpec& spec, double eta, long n) {
  spec.validate();
  RatePrediction p;
  p.gamma_star = optimal_gamma(spec.capacity, spec.source);
  p.predicted_exponent = predicted_exponent(spec.capacity, spec.source);
  p.regime = dominant_regime(spec.capacity, spec.source);
  p.within_guarantee = spec.source >= spec.capacity;
  p.k_star = spectral_cutoff(build_spectrum(spec), eta, p.gamma_star, n);
  return p;
}

RateFit fit_rate_exponent(const std::vector<double>& horizons,
                          const std::vector<double>& risks) {
  if (horizons.size() != risks.size())
    throw ConfigError("fit_rate_exponent: horizon/risk length mismatch");
  if (horizons.size() < 4)
    throw ConfigError("fit_rate_exponent: need at least 4 points, got " +
                      std::to_string(horizons.size()));
  std::size_t m = horizons.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(horizons[i] > 0.0))
      throw ConfigError("fit_rate_exponent: horizons must be positive");
    if (!(risks[i] > 0.0))
      throw ConfigError("fit_rate_exponent: risks must be positive, got " +
                        fmt_g(risks[i]) + " at point " + std::to_string(i));
    x[i] = std::log(horizons[i]);
    y[i] = std::log(risks[i]);
  }
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xbar += x[i];
    ybar += y[i];
  }
  xbar /= static_cast<double>(m);
  ybar /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double dx = x[i] - xbar, dy = y[i] - ybar;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0))
    throw ConfigError("fit_rate_exponent: horizons must not be all equal");
  RateFit f;
  f.slope = sxy / sxx;
  // all-equal risks fit exactly with slope 0
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace anylr
