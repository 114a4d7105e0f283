#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "anylr/errors.hpp"
#include "anylr/problem.hpp"
#include "anylr/schedule.hpp"
#include "anylr/theory.hpp"
#include "anylr/trace.hpp"

using namespace anylr;

namespace {
ProblemSpec make(std::size_t d, double a, double b, double sig2 = 0.0) {
  ProblemSpec s;
  s.dimension = d;
  s.capacity = a;
  s.source = b;
  s.noise_var = sig2;
  return s;
}

Spectrum explicit_spectrum(std::vector<double> lams) {
  Spectrum s;
  s.eigenvalues = std::move(lams);
  s.signal.assign(s.eigenvalues.size(), 0.0);
  s.target_m0.assign(s.eigenvalues.size(), 0.0);
  for (double lam : s.eigenvalues) s.trace += lam;
  return s;
}
}  // namespace

TEST_CASE("optimal gamma follows max(1 - a/b, 0)") {
  CHECK(optimal_gamma(1.5, 3.0) == 0.5);
  CHECK(optimal_gamma(1.9, 3.8) == 0.5);
  CHECK(optimal_gamma(1.5, 1.5) == 0.0);
  CHECK(optimal_gamma(2.0, 1.5) == 0.0);
  // b >> a approaches the 1/t schedule
  CHECK(optimal_gamma(1.5, 1e6) > 0.999);
  CHECK(optimal_gamma(1.5, 1e6) < 1.0);
  CHECK_THROWS_AS(optimal_gamma(1.0, 3.0), ConfigError);
  CHECK_THROWS_AS(optimal_gamma(1.5, 0.5), ConfigError);
}

TEST_CASE("optimal gamma is nondecreasing in b and zero up to b = a") {
  double a = 1.5;
  double prev = -1.0;
  for (double b = 1.01; b < 6.0; b += 0.01) {
    double g = optimal_gamma(a, b);
    CHECK(g >= prev);
    // stays below 1 and continuous: adjacent grid steps move < 0.01
    CHECK(g < 1.0);
    if (prev >= 0.0) CHECK(g - prev < 0.01);
    if (b <= a) CHECK(g == 0.0);
    prev = g;
  }
}

TEST_CASE("predicted exponent per regime") {
  CHECK(predicted_exponent(1.5, 3.0) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(predicted_exponent(1.5, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(predicted_exponent(1.5, 1.5) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  // b < a: bias-dominated fallback (b-1)/a
  CHECK(predicted_exponent(2.0, 1.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(predicted_exponent(1.9, 1.2) ==
        doctest::Approx(0.2 / 1.9).epsilon(1e-12));
}

TEST_CASE("dominant regime classification") {
  CHECK(dominant_regime(1.5, 3.0) == Regime::VarianceDominated);
  CHECK(dominant_regime(1.9, 1.2) == Regime::BiasDominated);
  CHECK(dominant_regime(1.5, 1.5) == Regime::Balanced);
  CHECK(std::string(regime_name(Regime::VarianceDominated)) ==
        "variance_dominated");
  CHECK(std::string(regime_name(Regime::BiasDominated)) == "bias_dominated");
  CHECK(std::string(regime_name(Regime::Balanced)) == "balanced");
}

TEST_CASE("spectral cutoff compares eigenvalues against log(n)/(eta n^(1-gamma))") {
  Spectrum s = explicit_spectrum({1.0, 0.25, 1.0 / 9.0});
  // eta chosen so the threshold is exactly 0.2 at gamma = 0
  long n = 100;
  double eta = std::log(100.0) / (0.2 * 100.0);
  CHECK(spectral_cutoff(s, eta, 0.0, n) == 2);
  // boundary eigenvalue qualifies (>=)
  double eta_eq = std::log(100.0) / (0.25 * 100.0);
  CHECK(spectral_cutoff(s, eta_eq, 0.0, n) == 2);
  // threshold above lambda_1 -> 0
  CHECK(spectral_cutoff(s, 1e-9, 0.0, n) == 0);
  // everything qualifies -> d
  CHECK(spectral_cutoff(s, 1e6, 0.0, n) == 3);
  CHECK_THROWS_AS(spectral_cutoff(s, eta, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(spectral_cutoff(s, 0.0, 0.0, n), ConfigError);
  CHECK_THROWS_AS(spectral_cutoff(s, eta, 1.5, n), ConfigError);
}

TEST_CASE("spectral cutoff scales like n^((1-gamma)/a)") {
  Spectrum s = build_spectrum(make(1000, 2.0, 4.0));
  std::vector<double> ns, cuts;
  for (long e = 10; e <= 20; ++e) {
    long n = 1L << e;
    long cut = spectral_cutoff(s, 0.5, 0.0, n);
    CHECK(cut >= 1);
    CHECK(cut < 1000);
    ns.push_back(static_cast<double>(n));
    cuts.push_back(static_cast<double>(cut));
  }
  RateFit f = fit_rate_exponent(ns, cuts);
  CHECK(f.slope == doctest::Approx(0.5).epsilon(0.1));  // (1-gamma)/a = 1/2
  CHECK(std::abs(f.slope - 0.5) < 0.05);
}

TEST_CASE("poly decay bound: noise-free variance vanishes") {
  RiskBound b = poly_decay_risk_bound(make(50, 1.5, 3.0, 0.0), 0.2, 0.5, 1000);
  CHECK(b.variance == 0.0);
  CHECK(b.bias > 0.0);
}

TEST_CASE("poly decay bound reduces to the finite-dimensional form when the cutoff covers the spectrum") {
  ProblemSpec p = make(5, 1.5, 3.0, 0.01);
  Spectrum s = build_spectrum(p);
  double eta = 0.5;
  long n = 1000000;
  REQUIRE(spectral_cutoff(s, eta, 0.5, n) == 5);
  RiskBound b = poly_decay_risk_bound(s, p.noise_var, eta, 0.5, n);
  double signal_norm = 0.0;
  for (double sk : s.signal) signal_norm += sk;
  CHECK(b.bias == doctest::Approx(signal_norm / static_cast<double>(n))
                      .epsilon(1e-12));
  CHECK(b.variance ==
        doctest::Approx(5.0 * 0.01 / (eta * static_cast<double>(n)))
            .epsilon(1e-12));
}

TEST_CASE("poly decay bound rejects out-of-range inputs") {
  ProblemSpec p = make(50, 1.5, 3.0, 0.01);
  CHECK_THROWS_AS(poly_decay_risk_bound(p, 0.2, 0.0, 1000), ConfigError);
  CHECK_THROWS_AS(poly_decay_risk_bound(p, 0.2, 1.0, 1000), ConfigError);
  // eta above 1/trace
  double too_big = 1.5 / build_spectrum(p).trace;
  CHECK_THROWS_AS(poly_decay_risk_bound(p, too_big, 0.5, 1000), ConfigError);
}

TEST_CASE("exact recursion risk stays within a reported constant of the bound") {
  ProblemSpec p = make(200, 1.5, 3.0, 0.01);
  double eta = 0.5 * max_stable_lr(p);
  long n = 4096;
  Schedule sched = Schedule::poly_decay(eta, 0.5);
  RiskTrace tr = run_trajectory(p, sched, n, {AveragingConfig::tail_fraction(1.0)},
                                {n});
  double risk = tr.averaged[0][0];
  double bound = poly_decay_risk_bound(p, eta, 0.5, n).total();
  REQUIRE(risk > 0.0);
  REQUIRE(bound > 0.0);
  double c = risk / bound;
  CHECK(std::isfinite(c));
  INFO("risk/bound ratio ", c);
  // the bound is a diagnostic envelope: no tightness asserted, only that it
  // is an upper envelope up to its absorbed constants
  CHECK(c < 1e3);
}

TEST_CASE("wsd bound exponents and regimes") {
  RiskBound b = wsd_risk_bound(1.5, 1.5, 10000, 0.01);
  CHECK(b.bias == doctest::Approx(std::pow(1e4, -1.0 / 3)).epsilon(1e-14));
  CHECK(b.variance ==
        doctest::Approx(0.01 * std::pow(1e4, -1.0 / 3)).epsilon(1e-14));
  // matched exponents at b = a agree with the averaged poly-decay rate
  CHECK(predicted_exponent(1.5, 1.5) == doctest::Approx(1.0 / 3));

  RiskBound v = wsd_risk_bound(1.5, 3.0, 100000, 0.01);
  CHECK(v.bias == doctest::Approx(std::pow(1e5, -4.0 / 3)).epsilon(1e-12));
  CHECK(v.variance ==
        doctest::Approx(0.01 * std::pow(1e5, -1.0 / 3)).epsilon(1e-12));
  CHECK(v.variance > v.bias);
  CHECK(dominant_regime(1.5, 3.0) == Regime::VarianceDominated);

  CHECK(wsd_risk_bound(1.5, 3.0, 1000, 0.0).variance == 0.0);
}

TEST_CASE("wsd bound rejects capacity outside (1, 2)") {
  CHECK_THROWS_WITH_AS(wsd_risk_bound(2.5, 3.0, 1000, 0.01),
                       doctest::Contains("capacity exponent a in (1, 2)"),
                       ConfigError);
  CHECK_THROWS_AS(wsd_risk_bound(1.0, 3.0, 1000, 0.01), ConfigError);
  CHECK_THROWS_AS(wsd_risk_bound(2.0, 3.0, 1000, 0.01), ConfigError);
  CHECK_THROWS_AS(wsd_risk_bound(1.5, 1.0, 1000, 0.01), ConfigError);
}

TEST_CASE("bounds are affine in the noise variance") {
  for (auto [a, b] : {std::pair{1.5, 3.0}, {1.9, 1.9}, {1.1, 2.2}}) {
    ProblemSpec p1 = make(100, a, b, 0.02);
    ProblemSpec p2 = make(100, a, b, 0.04);
    double eta = 0.5 * max_stable_lr(p1);
    RiskBound b1 = poly_decay_risk_bound(p1, eta, 0.5, 2000);
    RiskBound b2 = poly_decay_risk_bound(p2, eta, 0.5, 2000);
    CHECK(b2.bias == b1.bias);
    CHECK(b2.variance == doctest::Approx(2.0 * b1.variance).epsilon(1e-14));
    if (a < 2.0) {
      RiskBound w1 = wsd_risk_bound(a, b, 2000, 0.02);
      RiskBound w2 = wsd_risk_bound(a, b, 2000, 0.04);
      CHECK(w2.bias == w1.bias);
      CHECK(w2.variance == doctest::Approx(2.0 * w1.variance).epsilon(1e-14));
    }
  }
}

TEST_CASE("rate prediction assembles the per-instance summary") {
  RatePrediction p = rate_prediction(make(1000, 1.5, 3.0, 0.01), 0.2, 10000);
  CHECK(p.gamma_star == 0.5);
  CHECK(p.predicted_exponent == doctest::Approx(2.0 / 3));
  CHECK(p.regime == Regime::VarianceDominated);
  CHECK(p.within_guarantee);
  CHECK(p.k_star == spectral_cutoff(make(1000, 1.5, 3.0, 0.01), 0.2, 0.5, 10000));
  CHECK(p.k_star >= 1);

  RatePrediction q = rate_prediction(make(1000, 1.9, 1.2, 0.01), 0.2, 10000);
  CHECK(q.gamma_star == 0.0);
  CHECK_FALSE(q.within_guarantee);
  CHECK(q.regime == Regime::BiasDominated);
  CHECK(q.predicted_exponent == doctest::Approx(0.2 / 1.9));
}

TEST_CASE("log-log fit recovers exact power laws") {
  std::vector<double> ns, r1, r2, flat;
  for (long e = 10; e <= 16; ++e) {
    double n = static_cast<double>(1L << e);
    ns.push_back(n);
    r1.push_back(std::pow(n, -2.0 / 3));
    r2.push_back(17.0 * std::pow(n, -0.5));
    flat.push_back(3.14);
  }
  RateFit f1 = fit_rate_exponent(ns, r1);
  CHECK(f1.slope == doctest::Approx(-2.0 / 3).epsilon(1e-12));
  CHECK(f1.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  // scale invariance: the prefactor moves the intercept only
  RateFit f2 = fit_rate_exponent(ns, r2);
  CHECK(f2.slope == doctest::Approx(-0.5).epsilon(1e-12));
  RateFit f3 = fit_rate_exponent(ns, flat);
  CHECK(f3.slope == doctest::Approx(0.0));
  CHECK(f3.r_squared == 1.0);
}

TEST_CASE("log-log fit rejects degenerate input") {
  std::vector<double> ns = {1024, 2048, 4096, 8192};
  CHECK_THROWS_AS(fit_rate_exponent({1, 2, 3}, {1, 2, 3}), ConfigError);
  CHECK_THROWS_AS(fit_rate_exponent(ns, {1, 2, 3}), ConfigError);
  CHECK_THROWS_AS(fit_rate_exponent(ns, {1, 1, 0.0, 1}), ConfigError);
  CHECK_THROWS_AS(fit_rate_exponent(ns, {1, 1, -2, 1}), ConfigError);
  CHECK_THROWS_AS(
      fit_rate_exponent({100, 100, 100, 100}, {1, 2, 3, 4}), ConfigError);
}

TEST_CASE("recursion trace at gamma star fits the predicted rate") {
  // (a, b) = (1.5, 3): tail-averaged risk under eta/sqrt(t) should decay
  // close to N^(-2/3) over a doubling ladder
  ProblemSpec p = make(2000, 1.5, 3.0, 0.01);
  double eta = 0.5 * max_stable_lr(p);
  Schedule sched = Schedule::poly_decay(eta, optimal_gamma(1.5, 3.0));
  std::vector<long> cps;
  for (long e = 10; e <= 16; ++e) cps.push_back(1L << e);
  RiskTrace tr = run_trajectory(p, sched, cps.back(),
                                {AveragingConfig::tail_fraction(1.0)}, cps);
  std::vector<double> ns, risks;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    ns.push_back(static_cast<double>(cps[i]));
    REQUIRE(tr.averaged[0][i] > 0.0);
    risks.push_back(tr.averaged[0][i]);
  }
  RateFit f = fit_rate_exponent(ns, risks);
  CHECK(std::abs(-f.slope - predicted_exponent(1.5, 3.0)) < 0.1);
  CHECK(f.r_squared > 0.99);
}

TEST_CASE("power-mean difference inequality holds on sampled indices") {
  // (1-alpha) i^-alpha (i-j) <= i^(1-alpha) - j^(1-alpha) <= j^-alpha (i-j)
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> ua(1e-6, 1.0);
  std::uniform_int_distribution<long> ui(1, 1000000);
  for (int trial = 0; trial < 500; ++trial) {
    double alpha = ua(rng);
    long i = ui(rng), j = ui(rng);
    if (j > i) std::swap(i, j);
    double id = static_cast<double>(i), jd = static_cast<double>(j);
    double mid = std::pow(id, 1.0 - alpha) - std::pow(jd, 1.0 - alpha);
    double lo = (1.0 - alpha) * std::pow(id, -alpha) * (id - jd);
    double hi = std::pow(jd, -alpha) * (id - jd);
    double slack = 1e-9 * std::max(1.0, std::abs(mid));
    CHECK(lo <= mid + slack);
    CHECK(mid <= hi + slack);
  }
}
