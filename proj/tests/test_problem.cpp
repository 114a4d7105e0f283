#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "anylr/errors.hpp"
#include "anylr/problem.hpp"
#include "anylr/summation.hpp"

using namespace anylr;

namespace {
ProblemSpec make(std::size_t d, double a, double b) {
  ProblemSpec s;
  s.dimension = d;
  s.capacity = a;
  s.source = b;
  return s;
}
}  // namespace

TEST_CASE("equal exponents give flat target moments") {
  Spectrum s = build_spectrum(make(3, 2.0, 2.0));
  CHECK(s.eigenvalues[0] == 1.0);
  CHECK(s.eigenvalues[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.eigenvalues[2] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  for (double m0 : s.target_m0) CHECK(m0 == 1.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s.signal[i] == s.eigenvalues[i]);
}

TEST_CASE("mixed exponents evaluate i^(a-b)") {
  Spectrum s = build_spectrum(make(2, 1.5, 3.0));
  CHECK(s.eigenvalues[0] == 1.0);
  CHECK(s.eigenvalues[1] == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-15));
  CHECK(s.target_m0[0] == 1.0);
  CHECK(s.target_m0[1] == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-15));
}

TEST_CASE("scale constants multiply through") {
  ProblemSpec p = make(4, 1.5, 3.0);
  p.lambda_scale = 2.0;
  p.signal_scale = 0.5;
  Spectrum s = build_spectrum(p);
  CHECK(s.eigenvalues[0] == 2.0);
  CHECK(s.signal[0] == 0.5);
  CHECK(s.target_m0[0] == 0.25);
}

TEST_CASE("max stable lr is inverse trace") {
  CHECK(max_stable_lr(make(1, 2.0, 2.0)) == 1.0);
  CHECK(max_stable_lr(make(2, 2.0, 2.0)) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(max_stable_lr(make(3, 2.0, 2.0)) ==
        doctest::Approx(36.0 / 49.0).epsilon(1e-14));
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(build_spectrum(make(0, 2.0, 2.0)), ConfigError);
  CHECK_THROWS_AS(build_spectrum(make(3, 1.0, 2.0)), ConfigError);
  CHECK_THROWS_AS(build_spectrum(make(3, 2.0, 1.0)), ConfigError);
  CHECK_THROWS_AS(build_spectrum(make(3, 0.5, 2.0)), ConfigError);
  ProblemSpec p = make(3, 2.0, 2.0);
  p.noise_var = -0.1;
  CHECK_THROWS_AS(build_spectrum(p), ConfigError);
  p = make(3, 2.0, 2.0);
  p.lambda_scale = 0.0;
  CHECK_THROWS_AS(build_spectrum(p), ConfigError);
}

TEST_CASE("six-panel sweep grid builds cleanly") {
  for (double a : {1.1, 1.5, 1.9}) {
    for (double b : {a, 2 * a}) {
      Spectrum s = build_spectrum(make(100, a, b));
      for (std::size_t i = 1; i < s.dim(); ++i) {
        CHECK(s.eigenvalues[i - 1] >= s.eigenvalues[i]);
        CHECK(s.eigenvalues[i] > 0.0);
      }
    }
  }
}

TEST_CASE("doubling dimension preserves the prefix") {
  Spectrum small = build_spectrum(make(64, 1.5, 3.0));
  Spectrum big = build_spectrum(make(128, 1.5, 3.0));
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(small.eigenvalues[i] == big.eigenvalues[i]);
    CHECK(small.signal[i] == big.signal[i]);
    CHECK(small.target_m0[i] == big.target_m0[i]);
  }
}

TEST_CASE("signal partial sums increase and tails shrink") {
  Spectrum s = build_spectrum(make(200, 1.3, 2.0));
  double prefix = 0.0, last_prefix = -1.0;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    prefix += s.signal[i];
    CHECK(prefix > last_prefix);
    last_prefix = prefix;
  }
  double tail = 0.0;
  std::vector<double> tails(s.dim());
  for (std::size_t i = s.dim(); i-- > 0;) {
    tail += s.signal[i];
    tails[i] = tail;
  }
  for (std::size_t i = 1; i < s.dim(); ++i) CHECK(tails[i] <= tails[i - 1]);
}

TEST_CASE("trace matches compensated reference sum") {
  Spectrum s = build_spectrum(make(100000, 1.1, 1.1));
  CompensatedSum ref;
  for (double v : s.eigenvalues) ref.add(v);
  CHECK(s.trace == doctest::Approx(ref.value()).epsilon(1e-12));
}

TEST_CASE("spectrum csv export") {
  Spectrum s = build_spectrum(make(3, 2.0, 2.0));
  std::ostringstream out;
  write_spectrum_csv(s, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "index,lambda,signal,m0");
  std::getline(in, line);
  CHECK(line.substr(0, 2) == "1,");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}
