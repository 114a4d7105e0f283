#pragma once

#include <vector>

#include "anylr/problem.hpp"

namespace anylr {

// Which closed-form term decays slower for a power-law instance. With
// source >= capacity the noise term dominates; with source < capacity the
// untouched signal tail does.
enum class Regime { BiasDominated, VarianceDominated, Balanced };

const char* regime_name(Regime r);

// Closed-form rate summary for one (a, b) instance. within_guarantee is
// false when source < capacity; the exponent then comes from the
// bias-dominated analysis rather than the averaged poly-decay result.
struct RatePrediction {
  double gamma_star = 0.0;
  double predicted_exponent = 0.0;  // excess risk ~ N^(-predicted_exponent)
  long k_star = 0;
  Regime regime = Regime::Balanced;
  bool within_guarantee = true;
};

// Diagnostic upper envelope with absorbed constants set to 1. Never used
// as ground truth; the exact recursion is the oracle.
struct RiskBound {
  double bias = 0.0;
  double variance = 0.0;

  double total() const { return bias + variance; }
};

struct RateFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

// max(1 - a/b, 0): decay exponent of the theoretically best eta/t^gamma
// schedule. Zero for b <= a, where a constant rate with averaging is
// already optimal.
double optimal_gamma(double capacity, double source);

// Excess risk decay exponent at gamma = optimal_gamma: 1 - 1/b for
// b >= a, else (b - 1)/a from the bias-dominated regime.
double predicted_exponent(double capacity, double source);

Regime dominant_regime(double capacity, double source);

// Largest index k (1-based) with lambda_k >= log(n) / (eta * n^(1-gamma)),
// or 0 if none qualifies. Directions above the cutoff are fit to
// averaging resolution within n steps; the rest contribute their full
// signal.
long spectral_cutoff(const Spectrum& s, double eta, double gamma, long n);
long spectral_cutoff(const ProblemSpec& spec, double eta, double gamma,
                     long n);

// Upper bound on the tail-averaged excess risk under eta_t = eta/t^gamma:
//   bias     = (1/n) * sum_{k<=k*} s_k  +  sum_{k>k*} s_k
//   variance = k* sigma^2/(eta n)
//            + sigma^2 sum_{k>k*} (eta lambda_k^2 n^(1-2 gamma)
//                                  + lambda_k n^(-gamma))
RiskBound poly_decay_risk_bound(const Spectrum& s, double noise_var,
                                double eta, double gamma, long n);
RiskBound poly_decay_risk_bound(const ProblemSpec& spec, double eta,
                                double gamma, long n);

// Last-iterate bound for the constant-then-linear-decay schedule:
//   bias = n^(-(b-1)/a), variance = sigma^2 * n^(-(a-1)/a).
// Requires capacity in (1, 2); source > 1.
RiskBound wsd_risk_bound(double capacity, double source, long n,
                         double noise_var);

RatePrediction rate_prediction(const ProblemSpec& spec, double eta, long n);

// Ordinary least squares of log(risk) on log(horizon). Callers compare
// -slope against predicted_exponent. Requires >= 4 points, positive
// risks, non-degenerate horizons.
RateFit fit_rate_exponent(const std::vector<double>& horizons,
                          const std::vector<double>& risks);

}  // namespace anylr
