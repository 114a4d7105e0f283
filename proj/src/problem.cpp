#include "anylr/problem.hpp"

#include <cmath>
#include <ostream>

#include "anylr/errors.hpp"
#include "anylr/format.hpp"
#include "anylr/summation.hpp"

namespace anylr {

void ProblemSpec::validate() const {
  if (dimension == 0) throw ConfigError("problem: dimension must be >= 1");
  if (!(capacity > 1.0))
    throw ConfigError("problem: capacity exponent a must be > 1, got " +
                      fmt_g(capacity));
  if (!(source > 1.0))
    throw ConfigError("problem: source exponent b must be > 1, got " +
                      fmt_g(source));
  if (!(noise_var >= 0.0))
    throw ConfigError("problem: noise_var must be >= 0, got " +
                      fmt_g(noise_var));
  if (!(lambda_scale > 0.0))
    throw ConfigError("problem: lambda_scale must be > 0, got " +
                      fmt_g(lambda_scale));
  if (!(signal_scale > 0.0))
    throw ConfigError("problem: signal_scale must be > 0, got " +
                      fmt_g(signal_scale));
}

Spectrum build_spectrum(const ProblemSpec& spec) {
  spec.validate();
  Spectrum s;
  std::size_t d = spec.dimension;
  s.eigenvalues.resize(d);
  s.signal.resize(d);
  s.target_m0.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    double idx = static_cast<double>(i + 1);
    double lam = spec.lambda_scale * std::pow(idx, -spec.capacity);
    double sig = spec.signal_scale * std::pow(idx, -spec.source);
    s.eigenvalues[i] = lam;
    s.signal[i] = sig;
    s.target_m0[i] = sig / lam;
  }
  s.trace = pairwise_sum(s.eigenvalues);
  return s;
}

double max_stable_lr(const ProblemSpec& spec) {
  return max_stable_lr(build_spectrum(spec));
}

double max_stable_lr(const Spectrum& spectrum) { return 1.0 / spectrum.trace; }

void write_spectrum_csv(const Spectrum& s, std::ostream& out) {
  out << "index,lambda,signal,m0\n";
  for (std::size_t i = 0; i < s.dim(); ++i) {
    out << (i + 1) << ',' << fmt_full(s.eigenvalues[i]) << ','
        << fmt_full(s.signal[i]) << ',' << fmt_full(s.target_m0[i]) << '\n';
  }
}

}  // namespace anylr
