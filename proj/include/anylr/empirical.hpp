#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "anylr/averaging.hpp"
#include "anylr/problem.hpp"
#include "anylr/schedule.hpp"
#include "anylr/trace.hpp"

namespace anylr {

// One minibatch SGD update from explicit standard-normal draws, in the
// eigenbasis. Sample i occupies gauss[i*(d+1) .. i*(d+1)+d]: first the d
// factors of x (x_k = sqrt_lambda[k] * g_k), then the label-noise factor
// (eps = sqrt(noise_var) * g). The update is
//   w -= (lr / B) * sum_i x_i * (x_i . (w - w_star) - eps_i)
// with every residual taken against the incoming w.
void sgd_apply_batch(std::vector<double>& w, std::span<const double> w_star,
                     std::span<const double> sqrt_lambda,
                     std::span<const double> gauss, std::size_t batch_size,
                     double lr, double noise_var);

// 0.5 * sum_k lambda_k (w_k - w_star_k)^2: the population excess risk of w
// in closed form, no test-set sampling.
double iterate_excess_risk(std::span<const double> w,
                           std::span<const double> w_star,
                           const Spectrum& spectrum);

struct MonteCarloOptions {
  std::size_t batch_size = 1;
  std::size_t n_seeds = 2;      // >= 2 so the standard error is defined
  std::uint64_t seed_base = 0;  // seed i draws from stream key seed_base + i
  int jobs = 1;
};

// Mean and standard error of the excess risk across seeds, per column and
// checkpoint. Column 0 is always the last iterate ("last"); the remaining
// columns follow the averaging configs in order. A seed is divergent when
// its last-iterate risk at some checkpoint is non-finite or above 1e6x the
// initial risk (1e6 absolute from a zero-risk start); divergent seeds stay
// in the means and their stream keys are listed, never dropped.
struct MonteCarloTable {
  std::vector<long> checkpoints;
  std::vector<double> lr;  // schedule rate at each checkpoint (0 at t=0)
  std::vector<std::string> column_labels;
  std::vector<std::vector<double>> mean_risk;  // [column][checkpoint]
  std::vector<std::vector<double>> std_error;  // same shape
  std::size_t n_seeds = 0;
  std::size_t batch_size = 1;
  std::vector<std::uint64_t> divergent_seeds;
};

// Runs n_seeds independent SGD trajectories of sched for n_steps and reads
// risks at the checkpoints (same checkpoint contract as run_trajectory).
// Averaging configs act on the actual iterate vectors: running coordinate
// sums for tail windows, the t/f-half-life EMA recursion for ema configs, so
// every column estimates exactly what the moment engine computes in closed
// form. Seeds may run concurrently (opts.jobs); aggregation is a fixed-order
// pass over seed index, so results do not depend on the thread count.
MonteCarloTable monte_carlo_risk(const Spectrum& spectrum, double noise_var,
                                 const Schedule& sched, long n_steps,
                                 const std::vector<AveragingConfig>& averaging,
                                 const std::vector<long>& checkpoints,
                                 const MonteCarloOptions& opts);

MonteCarloTable monte_carlo_risk(const ProblemSpec& spec, const Schedule& sched,
                                 long n_steps,
                                 const std::vector<AveragingConfig>& averaging,
                                 const std::vector<long>& checkpoints,
                                 const MonteCarloOptions& opts);

// Cell-by-cell z-scores (monte carlo mean - exact) / SE between a Monte
// Carlo table and an exact trace over the same checkpoints. Cells whose
// exact value is NaN (window not active yet) are skipped; zero SE gives
// z = 0 on agreement to rounding (1e-12 relative, the deterministic t = 0
// cell) and +inf otherwise. The verdict is Bonferroni
// corrected: fail only when some cell's two-sided normal p-value drops
// below alpha / cells_compared. |z| > 3 without a corrected failure is
// counted but tolerated.
struct AgreementReport {
  std::vector<long> checkpoints;
  std::vector<std::string> column_labels;
  std::vector<std::vector<double>> z;  // [column][checkpoint]; NaN = skipped
  double max_abs_z = 0.0;
  std::size_t cells_compared = 0;
  std::size_t cells_beyond_3 = 0;
  double alpha = 0.0;
  bool pass = true;
};

AgreementReport compare_with_exact(const MonteCarloTable& mc,
                                   const RiskTrace& exact,
                                   double alpha = 0.0027);

// Columns: step, lr, excess_last, excess_<label>..., then seed_count and
// stderr_last, stderr_<label>..., so the front of each row matches the
// exact trace format column for column.
void write_monte_carlo_csv(const MonteCarloTable& table, std::ostream& out);

}  // namespace anylr
