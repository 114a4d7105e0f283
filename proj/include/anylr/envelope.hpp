#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "anylr/averaging.hpp"
#include "anylr/problem.hpp"
#include "anylr/schedule.hpp"

namespace anylr {

// Best tuned cosine run for one terminal budget. best_risk is the minimum
// over the declared grid, never an off-grid interpolation; a grid point
// whose run diverges contributes +inf and so never wins unless every point
// diverges.
struct EnvelopePoint {
  long horizon = 0;
  double best_risk = 0.0;
  double best_lr = 0.0;
  AveragingConfig best_averaging;
  double warmup_frac = 0.0;
  double floor_frac = 0.0;
};

struct CosineEnvelopeOptions {
  double warmup_frac = 0.0;  // synthetic default: no warmup
  double floor_frac = 0.0;
  int jobs = 1;
};

// One fresh cosine run per (horizon, base rate); the averaging configs ride
// along as columns of that run, so the tuned quantity is min over rate and
// averaging jointly. Horizons must be strictly ascending, grids nonempty.
// Ties keep the earliest grid point (smaller rate first, then averaging
// order). Deterministic for any jobs value.
std::vector<EnvelopePoint> build_cosine_envelope(
    const Spectrum& spectrum, double noise_var,
    const std::vector<long>& horizons, const std::vector<double>& lr_grid,
    const std::vector<AveragingConfig>& averaging_grid,
    const CosineEnvelopeOptions& opts = {});

std::vector<EnvelopePoint> build_cosine_envelope(
    const ProblemSpec& spec, const std::vector<long>& horizons,
    const std::vector<double>& lr_grid,
    const std::vector<AveragingConfig>& averaging_grid,
    const CosineEnvelopeOptions& opts = {});

// Intermediate-checkpoint readings of one horizon-free run: a single
// trajectory to max(horizons), every averaging config read at every horizon,
// and the per-horizon best over the averaging grid recorded. risk[i][j] is
// config i at horizon j; +inf from the first checkpoint a diverged run can
// no longer reach.
struct AnytimeSeries {
  Schedule schedule;
  std::vector<long> horizons;
  std::vector<AveragingConfig> averaging_grid;
  std::vector<std::vector<double>> risk;
  std::vector<double> best_risk;
  std::vector<std::size_t> best_config;
};

// Rejects horizon-dependent schedules: their trajectories are pinned to one
// terminal budget, which is exactly what an anytime evaluation must not
// assume. WSD goes through wsd_branches instead.
AnytimeSeries evaluate_anytime(const Spectrum& spectrum, double noise_var,
                               const Schedule& sched,
                               const std::vector<AveragingConfig>& averaging_grid,
                               const std::vector<long>& horizons);

AnytimeSeries evaluate_anytime(const ProblemSpec& spec, const Schedule& sched,
                               const std::vector<AveragingConfig>& averaging_grid,
                               const std::vector<long>& horizons);

// Last-iterate risks of warmup-stable-decay branches: one constant-rate
// trunk, a moment snapshot at each distinct branch step, and a linear decay
// from there to each horizon. The branch step for (horizon, p) is the last
// step the wsd schedule holds at the base rate, so a branch reproduces a
// fresh wsd run of that horizon bit for bit. risk[i][j] is decay fraction i
// at horizon j; +inf where the trunk or the branch diverged.
struct WsdBranchTable {
  double base_lr = 0.0;
  double floor_frac = 0.0;
  std::vector<long> horizons;
  std::vector<double> decay_fracs;
  std::vector<std::vector<double>> risk;
  std::vector<double> best_risk;   // per horizon, min over decay fractions
  std::vector<double> best_frac;   // argmin, earliest grid entry on ties
};

WsdBranchTable wsd_branches(const Spectrum& spectrum, double noise_var,
                            double base_lr, const std::vector<long>& horizons,
                            const std::vector<double>& decay_fracs,
                            double floor_frac, int jobs = 1);

WsdBranchTable wsd_branches(const ProblemSpec& spec, double base_lr,
                            const std::vector<long>& horizons,
                            const std::vector<double>& decay_fracs,
                            double floor_frac, int jobs = 1);

enum class SelectionRule { MinMean, MinMax };

// One schedule hyperparameter choice with its per-horizon risks (already
// best-over-averaging where applicable). The schedule carries the values the
// deterministic tie-break reads.
struct AnytimeCandidate {
  std::string label;
  Schedule schedule;
  std::vector<double> risk;
};

struct SelectionResult {
  std::size_t index = 0;
  double score = 0.0;  // mean or max relative gap to the envelope
};

// Picks the candidate whose relative gap to the envelope, aggregated over
// all horizons (mean for MinMean, worst case for MinMax), is smallest.
// Exact score ties fall to the smaller base rate, then smaller gamma, alpha
// and decay fraction, then candidate order. Every candidate must cover every
// horizon; envelope risks must be positive and finite.
SelectionResult anytime_hyperparameter_selection(
    const std::vector<AnytimeCandidate>& candidates,
    const std::vector<double>& envelope_risk, SelectionRule rule);

// Per-horizon comparison of one anytime method against the envelope.
struct GapRow {
  long horizon = 0;
  double anytime_risk = 0.0;
  double envelope_risk = 0.0;
  double delta = 0.0;           // anytime - envelope
  double relative_delta = 0.0;  // delta / envelope
};

std::vector<GapRow> make_gap_report(const std::vector<long>& horizons,
                                    const std::vector<double>& anytime,
                                    const std::vector<double>& envelope);

// Columns: horizon, best_risk, best_lr, warmup_frac, floor_frac, averaging.
void write_envelope_csv(const std::vector<EnvelopePoint>& points,
                        std::ostream& out);

// Columns: horizon, method, risk, envelope, delta, relative_delta; one block
// of rows per named method.
void write_gap_csv(
    const std::vector<std::pair<std::string, std::vector<GapRow>>>& methods,
    std::ostream& out);

}  // namespace anylr
