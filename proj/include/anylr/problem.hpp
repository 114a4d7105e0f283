#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace anylr {

// Diagonalized power-law regression instance: eigenvalues lambda_i =
// c_lambda * i^(-a) and signal coefficients s_i = lambda_i*(w*_i)^2 =
// c_w * i^(-b). a > 1 and b > 1 keep the trace and the initial risk
// summable as d grows.
struct ProblemSpec {
  std::size_t dimension = 0;
  double capacity = 0.0;      // eigenvalue decay exponent a
  double source = 0.0;        // signal decay exponent b
  double noise_var = 0.0;     // label noise sigma^2
  double lambda_scale = 1.0;  // c_lambda
  double signal_scale = 1.0;  // c_w

  void validate() const;  // throws ConfigError
};

// target_m0[i] = (w*_i)^2 doubles as the initial second moment for the
// zero-start iterate, so excess risk at t=0 is 0.5 * sum(signal).
struct Spectrum {
  std::vector<double> eigenvalues;  // nonincreasing, positive
  std::vector<double> signal;       // lambda_i * (w*_i)^2
  std::vector<double> target_m0;    // (w*_i)^2
  double trace = 0.0;               // sum of eigenvalues

  std::size_t dim() const { return eigenvalues.size(); }
};

Spectrum build_spectrum(const ProblemSpec& spec);

// Largest base step size the sweep grids are expressed against: 1/Tr(H).
double max_stable_lr(const ProblemSpec& spec);
double max_stable_lr(const Spectrum& spectrum);

// Columns: index, lambda, signal, m0.
void write_spectrum_csv(const Spectrum& s, std::ostream& out);

}  // namespace anylr
