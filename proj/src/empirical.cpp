#include "anylr/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "anylr/errors.hpp"
#include "anylr/format.hpp"
#include "anylr/parallel.hpp"
#include "anylr/rng.hpp"
#include "anylr/summation.hpp"

namespace anylr {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Vector-space counterpart of the trace module's per-config read state.
// Running coordinate sums stand in for the cross-moment accumulators; the
// risk of the realized average is an unbiased sample of the exact averaged
// risk, so the two engines estimate the same quantity column for column.
struct VectorColumn {
  AveragingConfig config;
  std::vector<double> wbar;      // Ema with f > 0
  std::vector<double> open_sum;  // TailFraction f == 1 or TailFromStep
  long open_start = 1;
  long open_count = 0;
  struct Window {
    long start = 0, end = 0;
    long count = 0;
    std::vector<double> sum;
  };
  std::vector<Window> windows;  // TailFraction f < 1, one per checkpoint
};

struct SeedOutput {
  std::vector<double> risks;  // [column * n_checkpoints + checkpoint]
  bool divergent = false;
};

SeedOutput run_one_seed(const Spectrum& spectrum, double noise_var,
                        const Schedule& sched, long n_steps,
                        const std::vector<AveragingConfig>& averaging,
                        const std::vector<long>& cps,
                        std::span<const double> w_star,
                        std::span<const double> sqrt_lambda,
                        std::size_t batch_size, double cap,
                        std::uint64_t stream_key) {
  const std::size_t d = spectrum.dim();
  const std::size_t n_cps = cps.size();
  GaussianStream stream(stream_key);
  std::vector<double> w(d, 0.0);
  std::vector<double> gauss(batch_size * (d + 1));

  std::vector<VectorColumn> cols;
  cols.reserve(averaging.size());
  for (const AveragingConfig& cfg : averaging) {
    VectorColumn col;
    col.config = cfg;
    switch (cfg.kind) {
      case AveragingKind::None:
        break;
      case AveragingKind::Ema:
        if (cfg.half_life_frac > 0.0) col.wbar.assign(d, 0.0);  // wbar_0 = w_0
        break;
      case AveragingKind::TailFraction:
        if (cfg.fraction == 1.0) {
          col.open_sum.assign(d, 0.0);
          col.open_start = 1;
        } else {
          for (long c : cps) {
            if (c == 0) continue;
            long len = tail_window_length(cfg.fraction, c);
            VectorColumn::Window win;
            win.start = c - len + 1;
            win.end = c;
            win.sum.assign(d, 0.0);
            col.windows.push_back(std::move(win));
          }
        }
        break;
      case AveragingKind::TailFromStep:
        col.open_sum.assign(d, 0.0);
        col.open_start = std::max<long>(1, cfg.start_step);
        break;
    }
    cols.push_back(std::move(col));
  }

  SeedOutput out;
  out.risks.assign((1 + cols.size()) * n_cps, kNan);

  auto risk_of_mean = [&](const std::vector<double>& sum, long count) {
    const double inv = 1.0 / static_cast<double>(count);
    CompensatedSum acc;
    for (std::size_t k = 0; k < d; ++k) {
      double diff = sum[k] * inv - w_star[k];
      acc.add(spectrum.eigenvalues[k] * diff * diff);
    }
    return 0.5 * acc.value();
  };

  auto record = [&](std::size_t cp_idx, long t) {
    double last = iterate_excess_risk(w, w_star, spectrum);
    if (!std::isfinite(last) || last > cap) out.divergent = true;
    out.risks[cp_idx] = last;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const VectorColumn& col = cols[i];
      double v = kNan;
      switch (col.config.kind) {
        case AveragingKind::None:
          v = last;
          break;
        case AveragingKind::Ema:
          v = col.config.half_life_frac == 0.0
                  ? last
                  : iterate_excess_risk(col.wbar, w_star, spectrum);
          break;
        case AveragingKind::TailFraction:
          if (t == 0) {
            v = last;  // window degenerates to {w_0}
          } else if (col.config.fraction == 1.0) {
            v = risk_of_mean(col.open_sum, col.open_count);
          } else {
            for (const auto& win : col.windows)
              if (win.end == t) v = risk_of_mean(win.sum, win.count);
          }
          break;
        case AveragingKind::TailFromStep:
          if (t >= col.open_start && col.open_count > 0)
            v = risk_of_mean(col.open_sum, col.open_count);
          break;
      }
      out.risks[(1 + i) * n_cps + cp_idx] = v;
    }
  };

  std::size_t next_cp = 0;
  if (next_cp < n_cps && cps[next_cp] == 0) {
    record(next_cp, 0);
    ++next_cp;
  }

  for (long t = 1; t <= n_steps; ++t) {
    double lr = sched.lr_at(t);
    for (VectorColumn& col : cols) {
      if (col.config.kind == AveragingKind::Ema && !col.wbar.empty() &&
          col.config.order == EmaUpdateOrder::BeforeStep) {
        double rho = ema_retention(col.config.half_life_frac, t);
        for (std::size_t k = 0; k < d; ++k)
          col.wbar[k] = rho * col.wbar[k] + (1.0 - rho) * w[k];
      }
    }
    for (double& g : gauss) g = stream.next();
    sgd_apply_batch(w, w_star, sqrt_lambda, gauss, batch_size, lr, noise_var);
    for (VectorColumn& col : cols) {
      if (col.config.kind == AveragingKind::Ema && !col.wbar.empty() &&
          col.config.order == EmaUpdateOrder::AfterStep) {
        double rho = ema_retention(col.config.half_life_frac, t);
        for (std::size_t k = 0; k < d; ++k)
          col.wbar[k] = rho * col.wbar[k] + (1.0 - rho) * w[k];
      }
      if (!col.open_sum.empty() && t >= col.open_start) {
        for (std::size_t k = 0; k < d; ++k) col.open_sum[k] += w[k];
        ++col.open_count;
      }
      for (auto& win : col.windows) {
        if (win.start <= t && t <= win.end) {
          for (std::size_t k = 0; k < d; ++k) win.sum[k] += w[k];
          ++win.count;
        }
      }
    }
    if (next_cp < n_cps && cps[next_cp] == t) {
      record(next_cp, t);
      ++next_cp;
    }
  }
  return out;
}

}  // namespace

void sgd_apply_batch(std::vector<double>& w, std::span<const double> w_star,
                     std::span<const double> sqrt_lambda,
                     std::span<const double> gauss, std::size_t batch_size,
                     double lr, double noise_var) {
  const std::size_t d = w.size();
  if (w_star.size() != d || sqrt_lambda.size() != d)
    throw ConfigError("sgd: target and eigenvalue vectors must match dim " +
                      std::to_string(d));
  if (batch_size == 0) throw ConfigError("sgd: batch size must be positive");
  if (gauss.size() != batch_size * (d + 1))
    throw ConfigError("sgd: need batch_size * (dim + 1) = " +
                      std::to_string(batch_size * (d + 1)) + " draws, got " +
                      std::to_string(gauss.size()));
  if (!(lr >= 0.0))
    throw ConfigError("sgd: step size must be >= 0, got " + fmt_g(lr));
  if (!(noise_var >= 0.0))
    throw ConfigError("sgd: noise variance must be >= 0, got " +
                      fmt_g(noise_var));

  const double noise_std = std::sqrt(noise_var);
  std::vector<double> grad(d, 0.0);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const double* g = gauss.data() + i * (d + 1);
    double resid = 0.0;
    for (std::size_t k = 0; k < d; ++k)
      resid += sqrt_lambda[k] * g[k] * (w[k] - w_star[k]);
    resid -= noise_std * g[d];
    for (std::size_t k = 0; k < d; ++k) grad[k] += sqrt_lambda[k] * g[k] * resid;
  }
  const double scale = lr / static_cast<double>(batch_size);
  for (std::size_t k = 0; k < d; ++k) w[k] -= scale * grad[k];
}

double iterate_excess_risk(std::span<const double> w,
                           std::span<const double> w_star,
                           const Spectrum& spectrum) {
  const std::size_t d = spectrum.dim();
  if (w.size() != d || w_star.size() != d)
    throw ConfigError("risk: vector dimensions must match the spectrum");
  CompensatedSum acc;
  for (std::size_t k = 0; k < d; ++k) {
    double diff = w[k] - w_star[k];
    acc.add(spectrum.eigenvalues[k] * diff * diff);
  }
  return 0.5 * acc.value();
}

MonteCarloTable monte_carlo_risk(const Spectrum& spectrum, double noise_var,
                                 const Schedule& sched, long n_steps,
                                 const std::vector<AveragingConfig>& averaging,
                                 const std::vector<long>& checkpoints,
                                 const MonteCarloOptions& opts) {
  sched.validate();
  if (!(noise_var >= 0.0))
    throw ConfigError("monte carlo: noise variance must be >= 0");
  if (opts.n_seeds < 2)
    throw ConfigError("monte carlo: need at least 2 seeds for a standard error");
  if (opts.batch_size == 0)
    throw ConfigError("monte carlo: batch size must be positive");
  if (n_steps < 0) throw ConfigError("monte carlo: negative step count");
  if (sched.horizon_dependent() && n_steps > sched.horizon)
    throw ConfigError("monte carlo: " + std::to_string(n_steps) +
                      " steps exceed the horizon of " + sched.label());

  std::vector<long> cps = checkpoints;
  if (cps.empty()) cps.push_back(n_steps);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] < 0 || cps[i] > n_steps)
      throw ConfigError("monte carlo: checkpoint " + std::to_string(cps[i]) +
                        " outside [0," + std::to_string(n_steps) + "]");
    if (i > 0 && cps[i] <= cps[i - 1])
      throw ConfigError("monte carlo: checkpoints must increase strictly");
  }
  for (const AveragingConfig& cfg : averaging) cfg.validate();

  const std::size_t d = spectrum.dim();
  std::vector<double> w_star(d), sqrt_lambda(d), zero(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    w_star[k] = std::sqrt(spectrum.target_m0[k]);
    sqrt_lambda[k] = std::sqrt(spectrum.eigenvalues[k]);
  }
  const double initial = iterate_excess_risk(zero, w_star, spectrum);
  const double cap = 1e6 * (initial > 0.0 ? initial : 1.0);

  const std::size_t n_cols = 1 + averaging.size();
  const std::size_t n_cps = cps.size();
  std::vector<SeedOutput> per_seed(opts.n_seeds);
  run_parallel(opts.n_seeds, opts.jobs, [&](std::size_t s) {
    per_seed[s] =
        run_one_seed(spectrum, noise_var, sched, n_steps, averaging, cps,
                     w_star, sqrt_lambda, opts.batch_size, cap,
                     opts.seed_base + static_cast<std::uint64_t>(s));
  });

  MonteCarloTable table;
  table.checkpoints = cps;
  table.lr.reserve(n_cps);
  for (long c : cps) table.lr.push_back(c == 0 ? 0.0 : sched.lr_at(c));
  table.column_labels.reserve(n_cols);
  table.column_labels.push_back("last");
  for (const AveragingConfig& cfg : averaging)
    table.column_labels.push_back(cfg.label());
  table.n_seeds = opts.n_seeds;
  table.batch_size = opts.batch_size;
  for (std::size_t s = 0; s < opts.n_seeds; ++s)
    if (per_seed[s].divergent)
      table.divergent_seeds.push_back(opts.seed_base +
                                      static_cast<std::uint64_t>(s));

  table.mean_risk.assign(n_cols, std::vector<double>(n_cps, kNan));
  table.std_error.assign(n_cols, std::vector<double>(n_cps, kNan));
  const double n = static_cast<double>(opts.n_seeds);
  for (std::size_t col = 0; col < n_cols; ++col) {
    for (std::size_t cp = 0; cp < n_cps; ++cp) {
      CompensatedSum sum;
      for (std::size_t s = 0; s < opts.n_seeds; ++s)
        sum.add(per_seed[s].risks[col * n_cps + cp]);
      double mean = sum.value() / n;
      CompensatedSum sq;
      for (std::size_t s = 0; s < opts.n_seeds; ++s) {
        double diff = per_seed[s].risks[col * n_cps + cp] - mean;
        sq.add(diff * diff);
      }
      table.mean_risk[col][cp] = mean;
      table.std_error[col][cp] = std::sqrt(sq.value() / (n - 1.0) / n);
    }
  }
  return table;
}

MonteCarloTable monte_carlo_risk(const ProblemSpec& spec, const Schedule& sched,
                                 long n_steps,
                                 const std::vector<AveragingConfig>& averaging,
                                 const std::vector<long>& checkpoints,
                                 const MonteCarloOptions& opts) {
  Spectrum spectrum = build_spectrum(spec);
  return monte_carlo_risk(spectrum, spec.noise_var, sched, n_steps, averaging,
                          checkpoints, opts);
}

AgreementReport compare_with_exact(const MonteCarloTable& mc,
                                   const RiskTrace& exact, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("agreement: alpha must be in (0,1)");
  if (mc.checkpoints != exact.steps)
    throw ConfigError("agreement: checkpoint grids differ");

  AgreementReport rep;
  rep.checkpoints = mc.checkpoints;
  rep.column_labels = mc.column_labels;
  rep.alpha = alpha;
  rep.z.assign(mc.column_labels.size(),
               std::vector<double>(mc.checkpoints.size(), kNan));

  for (std::size_t col = 0; col < mc.column_labels.size(); ++col) {
    const std::vector<double>* ref = nullptr;
    if (mc.column_labels[col] == "last") {
      ref = &exact.excess_last;
    } else {
      for (std::size_t j = 0; j < exact.column_labels.size(); ++j)
        if (exact.column_labels[j] == mc.column_labels[col])
          ref = &exact.averaged[j];
      if (!ref)
        throw ConfigError("agreement: exact trace has no column " +
                          mc.column_labels[col]);
    }
    for (std::size_t cp = 0; cp < mc.checkpoints.size(); ++cp) {
      double e = (*ref)[cp];
      if (std::isnan(e)) continue;
      double diff = mc.mean_risk[col][cp] - e;
      double se = mc.std_error[col][cp];
      double z;
      if (!std::isfinite(diff))
        z = kInf;
      else if (se == 0.0)
        // Deterministic cell (all seeds agree, e.g. t = 0): the two engines
        // sum in different orders, so demand agreement only to rounding.
        z = std::abs(diff) <= 1e-12 * std::max(std::abs(e), 1.0) ? 0.0 : kInf;
      else
        z = diff / se;
      rep.z[col][cp] = z;
      ++rep.cells_compared;
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
      if (std::abs(z) > 3.0) ++rep.cells_beyond_3;
    }
  }

  if (rep.cells_compared > 0) {
    const double bound = alpha / static_cast<double>(rep.cells_compared);
    for (const auto& row : rep.z)
      for (double z : row) {
        if (std::isnan(z)) continue;
        if (std::erfc(std::abs(z) / std::sqrt(2.0)) < bound) rep.pass = false;
      }
  }
  return rep;
}

void write_monte_carlo_csv(const MonteCarloTable& table, std::ostream& out) {
  out << "step,lr";
  for (const auto& label : table.column_labels) out << ",excess_" << label;
  out << ",seed_count";
  for (const auto& label : table.column_labels) out << ",stderr_" << label;
  out << '\n';
  for (std::size_t i = 0; i < table.checkpoints.size(); ++i) {
    out << table.checkpoints[i] << ',' << fmt_full(table.lr[i]);
    for (const auto& col : table.mean_risk) out << ',' << fmt_full(col[i]);
    out << ',' << table.n_seeds;
    for (const auto& col : table.std_error) out << ',' << fmt_full(col[i]);
    out << '\n';
  }
}

}  // namespace anylr
