#include "anylr/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include "anylr/errors.hpp"
#include "anylr/format.hpp"
#include "anylr/parallel.hpp"
#include "anylr/recursion.hpp"
#include "anylr/summation.hpp"
#include "anylr/trace.hpp"

namespace anylr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_horizons(const std::vector<long>& horizons, const char* who) {
  if (horizons.empty())
    throw ConfigError(std::string(who) + ": horizon list must not be empty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1)
      throw ConfigError(std::string(who) + ": horizons must be >= 1, got " +
                        std::to_string(horizons[i]));
    if (i > 0 && horizons[i] <= horizons[i - 1])
      throw ConfigError(std::string(who) +
                        ": horizons must be strictly ascending");
  }
}

// Last constant step of a wsd schedule: largest integer t with t <= p * T,
// which is where the trunk snapshot must be taken for a branch to reproduce
// a fresh run exactly.
long wsd_branch_step(double decay_frac, long horizon) {
  return static_cast<long>(
      std::floor(decay_frac * static_cast<double>(horizon)));
}

}  // namespace

std::vector<EnvelopePoint> build_cosine_envelope(
    const Spectrum& spectrum, double noise_var,
    const std::vector<long>& horizons, const std::vector<double>& lr_grid,
    const std::vector<AveragingConfig>& averaging_grid,
    const CosineEnvelopeOptions& opts) {
  check_horizons(horizons, "envelope");
  if (lr_grid.empty())
    throw ConfigError("envelope: rate grid must not be empty");
  if (averaging_grid.empty())
    throw ConfigError("envelope: averaging grid must not be empty");
  for (double lr : lr_grid)
    if (!(lr > 0.0))
      throw ConfigError("envelope: rates must be > 0, got " + fmt_g(lr));
  for (const AveragingConfig& cfg : averaging_grid) cfg.validate();

  const std::size_t n_h = horizons.size();
  const std::size_t n_lr = lr_grid.size();
  const std::size_t n_avg = averaging_grid.size();

  // risk of config k in the run (horizon i, rate j); +inf when that run
  // diverges, NaN never survives a checkpoint at t >= 1 here but is skipped
  // by the reduction anyway
  std::vector<std::vector<double>> cell((std::size_t)n_h * n_lr);
  run_parallel(n_h * n_lr, opts.jobs, [&](std::size_t idx) {
    const long h = horizons[idx / n_lr];
    const double lr = lr_grid[idx % n_lr];
    Schedule sched =
        Schedule::cosine(lr, h, opts.warmup_frac, opts.floor_frac);
    std::vector<double>& out = cell[idx];
    try {
      RiskTrace trace = run_trajectory(spectrum, noise_var, sched, h,
                                       averaging_grid, {h});
      out.resize(n_avg);
      for (std::size_t k = 0; k < n_avg; ++k) out[k] = trace.averaged[k][0];
    } catch (const DivergenceError&) {
      out.assign(n_avg, kInf);
    }
  });

  std::vector<EnvelopePoint> points;
  points.reserve(n_h);
  for (std::size_t i = 0; i < n_h; ++i) {
    EnvelopePoint p;
    p.horizon = horizons[i];
    p.best_risk = kInf;
    p.best_lr = lr_grid[0];
    p.best_averaging = averaging_grid[0];
    p.warmup_frac = opts.warmup_frac;
    p.floor_frac = opts.floor_frac;
    for (std::size_t j = 0; j < n_lr; ++j) {
      const std::vector<double>& risks = cell[i * n_lr + j];
      for (std::size_t k = 0; k < n_avg; ++k) {
        double r = risks[k];
        if (std::isnan(r)) continue;
        if (r < p.best_risk) {
          p.best_risk = r;
          p.best_lr = lr_grid[j];
          p.best_averaging = averaging_grid[k];
        }
      }
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<EnvelopePoint> build_cosine_envelope(
    const ProblemSpec& spec, const std::vector<long>& horizons,
    const std::vector<double>& lr_grid,
    const std::vector<AveragingConfig>& averaging_grid,
    const CosineEnvelopeOptions& opts) {
  Spectrum spectrum = build_spectrum(spec);
  return build_cosine_envelope(spectrum, spec.noise_var, horizons, lr_grid,
                               averaging_grid, opts);
}

AnytimeSeries evaluate_anytime(const Spectrum& spectrum, double noise_var,
                               const Schedule& sched,
                               const std::vector<AveragingConfig>& averaging_grid,
                               const std::vector<long>& horizons) {
  sched.validate();
  if (sched.horizon_dependent())
    throw ConfigError(
        "anytime: horizon-dependent schedule " + sched.label() +
        " cannot be read at intermediate checkpoints; wsd goes through "
        "branch evaluation");
  check_horizons(horizons, "anytime");
  if (averaging_grid.empty())
    throw ConfigError("anytime: averaging grid must not be empty");
  for (const AveragingConfig& cfg : averaging_grid) cfg.validate();

  AnytimeSeries series;
  series.schedule = sched;
  series.horizons = horizons;
  series.averaging_grid = averaging_grid;

  const std::size_t n_h = horizons.size();
  const std::size_t n_avg = averaging_grid.size();
  series.risk.assign(n_avg, std::vector<double>(n_h, kInf));

  // A diverged run keeps its finished checkpoints: rerun the surviving
  // prefix (strictly shorter, so it completes) and leave +inf past it.
  std::optional<RiskTrace> trace;
  try {
    trace = run_trajectory(spectrum, noise_var, sched, horizons.back(),
                           averaging_grid, horizons);
  } catch (const DivergenceError& died) {
    std::vector<long> prefix;
    for (long h : horizons)
      if (h < died.step) prefix.push_back(h);
    if (!prefix.empty())
      trace = run_trajectory(spectrum, noise_var, sched, prefix.back(),
                             averaging_grid, prefix);
  }
  if (trace) {
    for (std::size_t j = 0; j < trace->steps.size(); ++j)
      for (std::size_t k = 0; k < n_avg; ++k)
        series.risk[k][j] = trace->averaged[k][j];
  }

  series.best_risk.assign(n_h, kInf);
  series.best_config.assign(n_h, 0);
  for (std::size_t j = 0; j < n_h; ++j) {
    for (std::size_t k = 0; k < n_avg; ++k) {
      double r = series.risk[k][j];
      if (std::isnan(r)) continue;
      if (r < series.best_risk[j]) {
        series.best_risk[j] = r;
        series.best_config[j] = k;
      }
    }
  }
  return series;
}

AnytimeSeries evaluate_anytime(const ProblemSpec& spec, const Schedule& sched,
                               const std::vector<AveragingConfig>& averaging_grid,
                               const std::vector<long>& horizons) {
  Spectrum spectrum = build_spectrum(spec);
  return evaluate_anytime(spectrum, spec.noise_var, sched, averaging_grid,
                          horizons);
}

WsdBranchTable wsd_branches(const Spectrum& spectrum, double noise_var,
                            double base_lr, const std::vector<long>& horizons,
                            const std::vector<double>& decay_fracs,
                            double floor_frac, int jobs) {
  check_horizons(horizons, "wsd");
  if (decay_fracs.empty())
    throw ConfigError("wsd: decay fraction grid must not be empty");
  for (double p : decay_fracs)
    if (!(p > 0.0 && p < 1.0))
      throw ConfigError("wsd: decay fractions must lie in (0,1), got " +
                        fmt_g(p));
  if (!(base_lr > 0.0))
    throw ConfigError("wsd: base_lr must be > 0, got " + fmt_g(base_lr));
  if (!(floor_frac >= 0.0 && floor_frac <= 1.0))
    throw ConfigError("wsd: floor_frac must lie in [0,1], got " +
                      fmt_g(floor_frac));

  const std::size_t n_h = horizons.size();
  const std::size_t n_p = decay_fracs.size();

  struct Branch {
    std::size_t pi, hi;
    long step, horizon;
    double frac;
  };
  std::vector<Branch> branches;
  branches.reserve(n_p * n_h);
  std::vector<long> snap_steps;
  for (std::size_t pi = 0; pi < n_p; ++pi)
    for (std::size_t hi = 0; hi < n_h; ++hi) {
      long s = wsd_branch_step(decay_fracs[pi], horizons[hi]);
      if (s > horizons[hi])
        throw ConfigError("wsd: branch step " + std::to_string(s) +
                          " lies beyond its horizon " +
                          std::to_string(horizons[hi]));
      branches.push_back({pi, hi, s, horizons[hi], decay_fracs[pi]});
      snap_steps.push_back(s);
    }
  std::sort(snap_steps.begin(), snap_steps.end());
  snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()),
                   snap_steps.end());

  // one constant-rate trunk; a snapshot at every distinct branch step
  std::vector<std::optional<MomentRecursion>> snaps(snap_steps.size());
  {
    MomentRecursion trunk(spectrum, noise_var);
    std::size_t si = 0;
    while (si < snap_steps.size() && snap_steps[si] == 0) snaps[si++] = trunk;
    for (long t = 1; si < snap_steps.size(); ++t) {
      try {
        trunk.step(base_lr);
      } catch (const DivergenceError&) {
        break;  // later snapshots stay empty -> their branches read +inf
      }
      while (si < snap_steps.size() && snap_steps[si] == t) snaps[si++] = trunk;
    }
  }

  WsdBranchTable table;
  table.base_lr = base_lr;
  table.floor_frac = floor_frac;
  table.horizons = horizons;
  table.decay_fracs = decay_fracs;
  table.risk.assign(n_p, std::vector<double>(n_h, kInf));

  run_parallel(branches.size(), jobs, [&](std::size_t idx) {
    const Branch& b = branches[idx];
    auto it =
        std::lower_bound(snap_steps.begin(), snap_steps.end(), b.step);
    const std::optional<MomentRecursion>& snap =
        snaps[static_cast<std::size_t>(it - snap_steps.begin())];
    if (!snap) return;  // trunk died first
    MomentRecursion rec = *snap;
    Schedule sched = Schedule::wsd(base_lr, b.horizon, b.frac, floor_frac);
    try {
      for (long t = b.step + 1; t <= b.horizon; ++t) rec.step(sched.lr_at(t));
      table.risk[b.pi][b.hi] = rec.excess_risk();
    } catch (const DivergenceError&) {
    }
  });

  table.best_risk.assign(n_h, kInf);
  table.best_frac.assign(n_h, decay_fracs[0]);
  for (std::size_t hi = 0; hi < n_h; ++hi)
    for (std::size_t pi = 0; pi < n_p; ++pi)
      if (table.risk[pi][hi] < table.best_risk[hi]) {
        table.best_risk[hi] = table.risk[pi][hi];
        table.best_frac[hi] = decay_fracs[pi];
      }
  return table;
}

WsdBranchTable wsd_branches(const ProblemSpec& spec, double base_lr,
                            const std::vector<long>& horizons,
                            const std::vector<double>& decay_fracs,
                            double floor_frac, int jobs) {
  Spectrum spectrum = build_spectrum(spec);
  return wsd_branches(spectrum, spec.noise_var, base_lr, horizons, decay_fracs,
                      floor_frac, jobs);
}

SelectionResult anytime_hyperparameter_selection(
    const std::vector<AnytimeCandidate>& candidates,
    const std::vector<double>& envelope_risk, SelectionRule rule) {
  if (candidates.empty())
    throw ConfigError("selection: candidate list must not be empty");
  const std::size_t n_h = envelope_risk.size();
  if (n_h == 0) throw ConfigError("selection: envelope must not be empty");
  for (double e : envelope_risk)
    if (!(e > 0.0) || !std::isfinite(e))
      throw ConfigError(
          "selection: envelope risks must be positive and finite");
  for (const AnytimeCandidate& c : candidates) {
    if (c.risk.size() != n_h)
      throw ConfigError("selection: incomplete result matrix: " + c.label +
                        " covers " + std::to_string(c.risk.size()) + " of " +
                        std::to_string(n_h) + " horizons");
    for (double r : c.risk)
      if (std::isnan(r))
        throw ConfigError("selection: incomplete result matrix: " + c.label +
                          " has an undefined risk");
  }

  auto score_of = [&](const AnytimeCandidate& c) {
    bool has_inf = false;
    CompensatedSum mean;
    double worst = -kInf;
    for (std::size_t j = 0; j < n_h; ++j) {
      double gap = (c.risk[j] - envelope_risk[j]) / envelope_risk[j];
      if (std::isinf(gap)) {
        has_inf = true;
        break;
      }
      mean.add(gap);
      worst = std::max(worst, gap);
    }
    if (has_inf) return kInf;
    return rule == SelectionRule::MinMean
               ? mean.value() / static_cast<double>(n_h)
               : worst;
  };

  // tie order: base rate, then the decay knobs, then candidate order
  auto prefer = [](const Schedule& a, const Schedule& b) {
    if (a.base_lr != b.base_lr) return a.base_lr < b.base_lr;
    if (a.gamma != b.gamma) return a.gamma < b.gamma;
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    return a.decay_start_frac < b.decay_start_frac;
  };

  SelectionResult best;
  best.index = 0;
  best.score = score_of(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    double s = score_of(candidates[i]);
    if (s < best.score ||
        (s == best.score &&
         prefer(candidates[i].schedule, candidates[best.index].schedule))) {
      best.index = i;
      best.score = s;
    }
  }
  return best;
}

std::vector<GapRow> make_gap_report(const std::vector<long>& horizons,
                                    const std::vector<double>& anytime,
                                    const std::vector<double>& envelope) {
  if (horizons.size() != anytime.size() || horizons.size() != envelope.size())
    throw ConfigError("gap report: series lengths differ");
  std::vector<GapRow> rows;
  rows.reserve(horizons.size());
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    GapRow row;
    row.horizon = horizons[i];
    row.anytime_risk = anytime[i];
    row.envelope_risk = envelope[i];
    row.delta = anytime[i] - envelope[i];
    row.relative_delta = row.delta / envelope[i];
    rows.push_back(row);
  }
  return rows;
}

void write_envelope_csv(const std::vector<EnvelopePoint>& points,
                        std::ostream& out) {
  out << "horizon,best_risk,best_lr,warmup_frac,floor_frac,averaging\n";
  for (const EnvelopePoint& p : points)
    out << p.horizon << ',' << fmt_full(p.best_risk) << ','
        << fmt_full(p.best_lr) << ',' << fmt_full(p.warmup_frac) << ','
        << fmt_full(p.floor_frac) << ',' << p.best_averaging.label() << '\n';
}

void write_gap_csv(
    const std::vector<std::pair<std::string, std::vector<GapRow>>>& methods,
    std::ostream& out) {
  out << "horizon,method,risk,envelope,delta,relative_delta\n";
  for (const auto& [name, rows] : methods)
    for (const GapRow& row : rows)
      out << row.horizon << ',' << name << ',' << fmt_full(row.anytime_risk)
          << ',' << fmt_full(row.envelope_risk) << ',' << fmt_full(row.delta)
          << ',' << fmt_full(row.relative_delta) << '\n';
}

}  // namespace anylr
