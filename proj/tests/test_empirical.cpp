#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "anylr/empirical.hpp"
#include "anylr/errors.hpp"
#include "anylr/problem.hpp"
#include "anylr/recursion.hpp"
#include "anylr/schedule.hpp"
#include "anylr/trace.hpp"

using namespace anylr;

namespace {

Spectrum flat_spectrum(std::size_t d, double lam, double m0) {
  Spectrum s;
  s.eigenvalues.assign(d, lam);
  s.signal.assign(d, lam * m0);
  s.target_m0.assign(d, m0);
  s.trace = lam * static_cast<double>(d);
  return s;
}

}  // namespace

TEST_CASE("single forced sample reproduces hand arithmetic") {
  Spectrum s = flat_spectrum(1, 1.0, 1.0);
  std::vector<double> w = {0.0};
  std::vector<double> w_star = {1.0};
  std::vector<double> sqrt_lam = {1.0};

  // g = 1, no noise: w' = 0 - 0.1 * 1 * (0 - 1) = 0.1
  std::vector<double> gauss = {1.0, 0.0};
  sgd_apply_batch(w, w_star, sqrt_lam, gauss, 1, 0.1, 0.0);
  CHECK(w[0] == 0.1);

  // pure-noise step from the optimum: w' = -lr * x * (0 - eps) = lr * x * eps
  w = {0.0};
  w_star = {0.0};
  gauss = {0.5, -1.5};
  sgd_apply_batch(w, w_star, sqrt_lam, gauss, 1, 0.2, 4.0);
  CHECK(w[0] == doctest::Approx(-0.3).epsilon(1e-15));
}

TEST_CASE("a batch of identical samples equals the single-sample step") {
  Spectrum s = flat_spectrum(3, 1.0, 1.0);
  std::vector<double> w_star = {1.0, -0.5, 0.25};
  std::vector<double> sqrt_lam = {1.0, 1.0, 1.0};
  std::vector<double> one = {0.3, -1.1, 0.7, 0.4};
  std::vector<double> twice = {0.3, -1.1, 0.7, 0.4, 0.3, -1.1, 0.7, 0.4};

  std::vector<double> wa = {0.1, 0.2, 0.3}, wb = wa;
  sgd_apply_batch(wa, w_star, sqrt_lam, one, 1, 0.05, 0.5);
  sgd_apply_batch(wb, w_star, sqrt_lam, twice, 2, 0.05, 0.5);
  for (int k = 0; k < 3; ++k) CHECK(wa[k] == wb[k]);
}

TEST_CASE("step is a no-op at the optimum, at lr 0, and rejects bad sizes") {
  Spectrum s = flat_spectrum(2, 1.0, 1.0);
  std::vector<double> w_star = {1.0, 2.0};
  std::vector<double> sqrt_lam = {1.0, 0.5};
  std::vector<double> gauss = {0.7, -0.3, 1.9};

  std::vector<double> w = w_star;
  sgd_apply_batch(w, w_star, sqrt_lam, gauss, 1, 0.3, 0.0);
  CHECK(w[0] == w_star[0]);
  CHECK(w[1] == w_star[1]);

  w = {5.0, -5.0};
  sgd_apply_batch(w, w_star, sqrt_lam, gauss, 1, 0.0, 1.0);
  CHECK(w[0] == 5.0);
  CHECK(w[1] == -5.0);

  CHECK_THROWS_AS(sgd_apply_batch(w, w_star, sqrt_lam, gauss, 2, 0.1, 1.0),
                  ConfigError);
  CHECK_THROWS_AS(sgd_apply_batch(w, w_star, sqrt_lam, gauss, 0, 0.1, 1.0),
                  ConfigError);
  CHECK_THROWS_AS(sgd_apply_batch(w, w_star, sqrt_lam, gauss, 1, -0.1, 1.0),
                  ConfigError);
}

TEST_CASE("iterate risk is the half weighted squared distance") {
  Spectrum s;
  s.eigenvalues = {2.0, 0.5};
  s.signal = {2.0, 2.0};
  s.target_m0 = {1.0, 4.0};
  s.trace = 2.5;
  std::vector<double> w = {0.0, 0.0};
  std::vector<double> w_star = {1.0, 2.0};
  CHECK(iterate_excess_risk(w, w_star, s) == 2.0);
  CHECK(iterate_excess_risk(w_star, w_star, s) == 0.0);
  std::vector<double> short_vec = {1.0};
  CHECK_THROWS_AS(iterate_excess_risk(short_vec, w_star, s), ConfigError);
}

TEST_CASE("zero steps report the initial bias with zero standard error") {
  ProblemSpec spec{20, 1.5, 2.0, 0.1, 1.0, 1.0};
  Spectrum s = build_spectrum(spec);
  MonteCarloOptions opts;
  opts.n_seeds = 2;
  MonteCarloTable mc = monte_carlo_risk(spec, Schedule::constant(0.01), 0, {},
                                        {}, opts);
  REQUIRE(mc.checkpoints == std::vector<long>{0});
  CHECK(mc.lr[0] == 0.0);

  std::vector<double> zero(s.dim(), 0.0), w_star(s.dim());
  for (std::size_t k = 0; k < s.dim(); ++k)
    w_star[k] = std::sqrt(s.target_m0[k]);
  CHECK(mc.mean_risk[0][0] == iterate_excess_risk(zero, w_star, s));
  CHECK(mc.std_error[0][0] == 0.0);
  CHECK(mc.divergent_seeds.empty());
}

TEST_CASE("tables are bit-reproducible and independent of the thread count") {
  ProblemSpec spec{8, 1.3, 1.8, 0.05, 1.0, 1.0};
  Schedule sched = Schedule::poly_decay(0.3 * max_stable_lr(spec), 0.4);
  std::vector<AveragingConfig> avg = {AveragingConfig::tail_fraction(1.0),
                                      AveragingConfig::ema(8.0)};
  std::vector<long> cps = {10, 40};
  MonteCarloOptions opts;
  opts.batch_size = 2;
  opts.n_seeds = 10;
  opts.seed_base = 77;

  MonteCarloTable a = monte_carlo_risk(spec, sched, 40, avg, cps, opts);
  MonteCarloTable b = monte_carlo_risk(spec, sched, 40, avg, cps, opts);
  opts.jobs = 3;
  MonteCarloTable c = monte_carlo_risk(spec, sched, 40, avg, cps, opts);
  for (std::size_t col = 0; col < a.mean_risk.size(); ++col)
    for (std::size_t cp = 0; cp < cps.size(); ++cp) {
      CHECK(a.mean_risk[col][cp] == b.mean_risk[col][cp]);
      CHECK(a.std_error[col][cp] == b.std_error[col][cp]);
      CHECK(a.mean_risk[col][cp] == c.mean_risk[col][cp]);
      CHECK(a.std_error[col][cp] == c.std_error[col][cp]);
    }

  opts.jobs = 1;
  opts.seed_base = 78;
  MonteCarloTable d = monte_carlo_risk(spec, sched, 40, avg, cps, opts);
  CHECK(d.mean_risk[0][1] != a.mean_risk[0][1]);
}

TEST_CASE("sampled risks agree with the moment engine on every column") {
  ProblemSpec spec{30, 1.5, 3.0, 0.25, 1.0, 1.0};
  Schedule sched = Schedule::constant(0.4 * max_stable_lr(spec));
  std::vector<AveragingConfig> avg = {
      AveragingConfig::tail_fraction(1.0), AveragingConfig::tail_fraction(0.25),
      AveragingConfig::ema(12.5),
      AveragingConfig::ema(6.0, EmaUpdateOrder::BeforeStep),
      AveragingConfig::tail_from_step(100)};
  std::vector<long> cps = {100, 250, 500};
  MonteCarloOptions opts;
  opts.n_seeds = 200;
  opts.seed_base = 1000;

  MonteCarloTable mc = monte_carlo_risk(spec, sched, 500, avg, cps, opts);
  RiskTrace exact = run_trajectory(spec, sched, 500, avg, cps);
  AgreementReport rep = compare_with_exact(mc, exact);
  CHECK(rep.cells_compared == 18);
  CHECK(rep.pass);
  CHECK(rep.max_abs_z < 3.0);
  CHECK(mc.divergent_seeds.empty());
}

TEST_CASE("ema with zero half-life follows the last iterate exactly") {
  ProblemSpec spec{6, 1.4, 2.0, 0.2, 1.0, 1.0};
  Schedule sched = Schedule::constant(0.3 * max_stable_lr(spec));
  MonteCarloOptions opts;
  opts.n_seeds = 5;
  opts.seed_base = 11;
  MonteCarloTable mc = monte_carlo_risk(spec, sched, 30,
                                        {AveragingConfig::ema(0.0)}, {15, 30},
                                        opts);
  for (std::size_t cp = 0; cp < 2; ++cp) {
    CHECK(mc.mean_risk[1][cp] == mc.mean_risk[0][cp]);
    CHECK(mc.std_error[1][cp] == mc.std_error[0][cp]);
  }
}

TEST_CASE("plateau risk under label noise scales like one over batch size") {
  // Step size well inside the stability region, where the minibatch noise
  // dominates the multiplicative fluctuation; at the edge the B = 1 plateau
  // inflates and the 1/B law degrades.
  Spectrum s = flat_spectrum(20, 1.0, 0.0);
  Schedule sched = Schedule::constant(0.005);
  std::vector<long> cps = {800};
  double plateau[3];
  const std::size_t batches[3] = {1, 4, 16};
  for (int i = 0; i < 3; ++i) {
    MonteCarloOptions opts;
    opts.batch_size = batches[i];
    opts.n_seeds = 150;
    opts.seed_base = 7000 + 100 * i;
    MonteCarloTable mc = monte_carlo_risk(s, 1.0, sched, 800, {}, cps, opts);
    CHECK(mc.divergent_seeds.empty());
    plateau[i] = mc.mean_risk[0][0];
  }
  for (int i = 1; i < 3; ++i) {
    double ratio = static_cast<double>(batches[i]) * plateau[i] / plateau[0];
    CHECK(std::abs(ratio - 1.0) <= 0.2);
  }
}

TEST_CASE("large batches keep averaged constant-rate risk at or below cosine") {
  ProblemSpec spec{10, 1.5, 1.5, 1.0, 1.0, 1.0};
  double eta = 0.5 * max_stable_lr(spec);
  const long n = 256;
  std::vector<long> cps = {n};
  MonteCarloOptions opts;
  opts.batch_size = 256;
  opts.n_seeds = 20;

  opts.seed_base = 31000;
  MonteCarloTable ct =
      monte_carlo_risk(spec, Schedule::constant(eta), n,
                       {AveragingConfig::tail_fraction(0.25)}, cps, opts);
  opts.seed_base = 32000;
  MonteCarloTable co =
      monte_carlo_risk(spec, Schedule::cosine(eta, n), n, {}, cps, opts);

  double slack = 3.0 * (ct.std_error[1][0] + co.std_error[0][0]);
  CHECK(ct.mean_risk[1][0] <= co.mean_risk[0][0] + slack);
}

TEST_CASE("a recursion with the coupling disabled is detected as wrong") {
  Spectrum s = flat_spectrum(5, 1.0, 1.0);
  Schedule sched = Schedule::constant(0.1);
  std::vector<long> cps = {100};
  MonteCarloOptions opts;
  opts.n_seeds = 50;
  opts.seed_base = 4242;
  MonteCarloTable mc = monte_carlo_risk(s, 1.0, sched, 100, {}, cps, opts);

  MomentRecursion broken(s, 1.0, 0.0);
  for (long t = 1; t <= 100; ++t) broken.step(sched.lr_at(t));
  RiskTrace fake;
  fake.steps = cps;
  fake.lr = {sched.lr_at(100)};
  fake.excess_last = {broken.excess_risk()};

  AgreementReport rep = compare_with_exact(mc, fake);
  CHECK_FALSE(rep.pass);
  CHECK(rep.z[0][0] > 5.0);
}

TEST_CASE("divergent seeds are listed and kept in the mean") {
  Spectrum s = flat_spectrum(3, 1.0, 1.0);
  MonteCarloOptions opts;
  opts.n_seeds = 40;
  opts.seed_base = 5500;
  MonteCarloTable mc = monte_carlo_risk(s, 0.0, Schedule::constant(2.5), 60,
                                        {}, {60}, opts);
  CHECK(mc.divergent_seeds.size() == 40);
  CHECK(mc.divergent_seeds.front() == 5500);
  double initial = 0.5 * 3.0;
  CHECK(mc.mean_risk[0][0] > 1e6 * initial);
}

TEST_CASE("windows that have not started read as NaN and are skipped") {
  ProblemSpec spec{5, 1.5, 2.0, 0.1, 1.0, 1.0};
  Schedule sched = Schedule::constant(0.2 * max_stable_lr(spec));
  std::vector<AveragingConfig> avg = {AveragingConfig::tail_from_step(50)};
  std::vector<long> cps = {25, 60};
  MonteCarloOptions opts;
  opts.n_seeds = 4;
  opts.seed_base = 9;
  MonteCarloTable mc = monte_carlo_risk(spec, sched, 60, avg, cps, opts);
  CHECK(std::isnan(mc.mean_risk[1][0]));
  CHECK(std::isfinite(mc.mean_risk[1][1]));

  RiskTrace exact = run_trajectory(spec, sched, 60, avg, cps);
  AgreementReport rep = compare_with_exact(mc, exact);
  CHECK(rep.cells_compared == 3);  // the unstarted window cell is skipped
  CHECK(std::isnan(rep.z[1][0]));
}

TEST_CASE("input validation mirrors the trajectory contract") {
  ProblemSpec spec{4, 1.5, 2.0, 0.0, 1.0, 1.0};
  Schedule sched = Schedule::constant(0.01);
  MonteCarloOptions opts;

  opts.n_seeds = 1;
  CHECK_THROWS_AS(monte_carlo_risk(spec, sched, 10, {}, {10}, opts),
                  ConfigError);
  opts.n_seeds = 2;
  opts.batch_size = 0;
  CHECK_THROWS_AS(monte_carlo_risk(spec, sched, 10, {}, {10}, opts),
                  ConfigError);
  opts.batch_size = 1;
  CHECK_THROWS_AS(monte_carlo_risk(spec, sched, 10, {}, {11}, opts),
                  ConfigError);
  CHECK_THROWS_AS(monte_carlo_risk(spec, sched, -1, {}, {}, opts),
                  ConfigError);
  CHECK_THROWS_AS(
      monte_carlo_risk(spec, Schedule::cosine(0.01, 5), 10, {}, {10}, opts),
      ConfigError);
}

TEST_CASE("agreement helper rejects mismatched layouts and handles zero SE") {
  MonteCarloTable mc;
  mc.checkpoints = {5};
  mc.lr = {0.1};
  mc.column_labels = {"last"};
  mc.mean_risk = {{2.0}};
  mc.std_error = {{0.0}};
  mc.n_seeds = 2;

  RiskTrace exact;
  exact.steps = {5};
  exact.lr = {0.1};
  exact.excess_last = {2.0};

  AgreementReport same = compare_with_exact(mc, exact);
  CHECK(same.pass);
  CHECK(same.z[0][0] == 0.0);

  // a deterministic cell tolerates rounding-order noise but nothing more
  exact.excess_last = {2.0 * (1.0 + 5e-15)};
  AgreementReport rounding = compare_with_exact(mc, exact);
  CHECK(rounding.pass);
  CHECK(rounding.z[0][0] == 0.0);

  exact.excess_last = {2.5};
  AgreementReport off = compare_with_exact(mc, exact);
  CHECK_FALSE(off.pass);
  CHECK(std::isinf(off.z[0][0]));

  RiskTrace wrong_steps = exact;
  wrong_steps.steps = {6};
  CHECK_THROWS_AS(compare_with_exact(mc, wrong_steps), ConfigError);

  mc.column_labels = {"unknown"};
  CHECK_THROWS_AS(compare_with_exact(mc, exact), ConfigError);

  mc.column_labels = {"last"};
  CHECK_THROWS_AS(compare_with_exact(mc, exact, 0.0), ConfigError);
}

TEST_CASE("csv rows extend the exact trace format") {
  ProblemSpec spec{3, 1.5, 2.0, 0.1, 1.0, 1.0};
  Schedule sched = Schedule::constant(0.05);
  MonteCarloOptions opts;
  opts.n_seeds = 3;
  opts.seed_base = 2;
  MonteCarloTable mc = monte_carlo_risk(
      spec, sched, 20, {AveragingConfig::tail_fraction(1.0)}, {0, 20}, opts);

  std::ostringstream out;
  write_monte_carlo_csv(mc, out);
  std::string text = out.str();
  std::string header = text.substr(0, text.find('\n'));
  CHECK(header ==
        "step,lr,excess_last,excess_tail_f1,seed_count,stderr_last,"
        "stderr_tail_f1");
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("\n0,") != std::string::npos);
  CHECK(text.find(",3,") != std::string::npos);
}
