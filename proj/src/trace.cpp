#include "anylr/trace.hpp"

#include <limits>
#include <memory>
#include <ostream>

#include "anylr/errors.hpp"
#include "anylr/format.hpp"
#include "anylr/recursion.hpp"

namespace anylr {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Per-config read state: an EMA tracker, one open-ended tail window, or a
// family of per-checkpoint windows for fractional tails (their starts
// differ, so they cannot share an accumulator).
struct ColumnTracker {
  AveragingConfig config;
  std::unique_ptr<EmaMomentTracker> ema;
  std::unique_ptr<TailWindowTracker> open_tail;
  std::vector<std::unique_ptr<TailWindowTracker>> closed;
  std::vector<long> closed_ends;

  double read(long t, double last_risk) const {
    switch (config.kind) {
      case AveragingKind::None:
        return last_risk;
      case AveragingKind::Ema:
        return ema->averaged_risk();
      case AveragingKind::TailFraction:
        if (t == 0) return last_risk;  // window degenerates to {w_0}
        if (open_tail) return open_tail->averaged_risk(t);
        for (std::size_t i = 0; i < closed.size(); ++i)
          if (closed_ends[i] == t) return closed[i]->averaged_risk(t);
        return kNan;
      case AveragingKind::TailFromStep:
        return t >= config.start_step && t >= 1
                   ? open_tail->averaged_risk(t)
                   : kNan;
    }
    return kNan;
  }
};

}  // namespace

RiskTrace run_trajectory(const Spectrum& spectrum, double noise_var,
                         const Schedule& sched, long n_steps,
                         const std::vector<AveragingConfig>& averaging,
                         const std::vector<long>& checkpoints) {
  if (n_steps < 0) throw ConfigError("trajectory: negative step count");
  if (sched.horizon_dependent() && n_steps > sched.horizon)
    throw ConfigError("trajectory: " + std::to_string(n_steps) +
                      " steps exceed the horizon of " + sched.label());

  std::vector<long> cps = checkpoints;
  if (cps.empty()) cps.push_back(n_steps);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] < 0 || cps[i] > n_steps)
      throw ConfigError("trajectory: checkpoint " + std::to_string(cps[i]) +
                        " outside [0," + std::to_string(n_steps) + "]");
    if (i > 0 && cps[i] <= cps[i - 1])
      throw ConfigError("trajectory: checkpoints must increase strictly");
  }

  std::vector<ColumnTracker> cols;
  cols.reserve(averaging.size());
  for (const AveragingConfig& cfg : averaging) {
    cfg.validate();
    ColumnTracker col;
    col.config = cfg;
    switch (cfg.kind) {
      case AveragingKind::None:
        break;
      case AveragingKind::Ema:
        col.ema = std::make_unique<EmaMomentTracker>(
            spectrum, cfg.half_life_frac, cfg.order);
        break;
      case AveragingKind::TailFraction:
        if (cfg.fraction == 1.0) {
          col.open_tail = std::make_unique<TailWindowTracker>(spectrum, 1);
        } else {
          for (long c : cps) {
            if (c == 0) continue;
            long len = tail_window_length(cfg.fraction, c);
            col.closed.push_back(std::make_unique<TailWindowTracker>(
                spectrum, c - len + 1, c));
            col.closed_ends.push_back(c);
          }
        }
        break;
      case AveragingKind::TailFromStep:
        col.open_tail = std::make_unique<TailWindowTracker>(
            spectrum, cfg.start_step < 1 ? 1 : cfg.start_step);
        break;
    }
    cols.push_back(std::move(col));
  }

  RiskTrace trace;
  trace.column_labels.reserve(cols.size());
  for (const auto& col : cols) trace.column_labels.push_back(col.config.label());
  trace.averaged.assign(cols.size(), {});

  MomentRecursion rec(spectrum, noise_var);
  std::size_t next_cp = 0;
  auto record = [&](long t, double lr) {
    trace.steps.push_back(t);
    trace.lr.push_back(lr);
    double last = rec.excess_risk();
    trace.excess_last.push_back(last);
    for (std::size_t i = 0; i < cols.size(); ++i)
      trace.averaged[i].push_back(cols[i].read(t, last));
  };

  if (n_steps == 0) {
    record(0, 0.0);
    return trace;
  }
  if (next_cp < cps.size() && cps[next_cp] == 0) {
    record(0, 0.0);
    ++next_cp;
  }

  for (long t = 1; t <= n_steps; ++t) {
    double lr = sched.lr_at(t);
    for (auto& col : cols)
      if (col.ema && col.ema->order() == EmaUpdateOrder::BeforeStep)
        col.ema->absorb(rec.moments(), t);
    rec.step(lr);
    for (auto& col : cols) {
      if (col.ema) {
        col.ema->contract(lr);
        if (col.ema->order() == EmaUpdateOrder::AfterStep)
          col.ema->absorb(rec.moments(), t);
      }
      if (col.open_tail) col.open_tail->observe(rec.moments(), lr, t);
      for (auto& w : col.closed) w->observe(rec.moments(), lr, t);
    }
    if (next_cp < cps.size() && cps[next_cp] == t) {
      record(t, lr);
      ++next_cp;
    }
  }
  return trace;
}

RiskTrace run_trajectory(const ProblemSpec& spec, const Schedule& sched,
                         long n_steps,
                         const std::vector<AveragingConfig>& averaging,
                         const std::vector<long>& checkpoints) {
  Spectrum spectrum = build_spectrum(spec);
  return run_trajectory(spectrum, spec.noise_var, sched, n_steps, averaging,
                        checkpoints);
}

void write_trace_csv(const RiskTrace& trace, std::ostream& out) {
  out << "step,lr,excess_last";
  for (const auto& label : trace.column_labels) out << ",excess_" << label;
  out << '\n';
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    out << trace.steps[i] << ',' << fmt_full(trace.lr[i]) << ','
        << fmt_full(trace.excess_last[i]);
    for (const auto& col : trace.averaged) out << ',' << fmt_full(col[i]);
    out << '\n';
  }
}

}  // namespace anylr
