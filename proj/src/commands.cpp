#include "anylr/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "anylr/empirical.hpp"
#include "anylr/envelope.hpp"
#include "anylr/errors.hpp"
#include "anylr/figure.hpp"
#include "anylr/format.hpp"
#include "anylr/parallel.hpp"
#include "anylr/recursion.hpp"
#include "anylr/theory.hpp"
#include "anylr/trace.hpp"

namespace anylr {
namespace {

namespace fs = std::filesystem;

std::vector<double> to_double(const std::vector<long>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (long x : v) out.push_back(static_cast<double>(x));
  return out;
}

// Stages all writes: target names are checked against the fail-if-exists
// policy up front, so a rerun without --overwrite leaves every existing
// file untouched instead of clobbering some before failing.
class OutputWriter {
 public:
  OutputWriter(const CommandOptions& opts) : dir_(opts.out_dir), overwrite_(opts.overwrite) {
    if (dir_.empty()) throw ConfigError("output: no output directory resolved");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
      throw IoError("cannot create output directory " + dir_ + ": " + ec.message());
  }

  std::string path_of(const std::string& name) const {
    return (fs::path(dir_) / name).string();
  }

  void precheck(const std::vector<std::string>& names) const {
    if (overwrite_) return;
    for (const std::string& name : names) {
      std::string p = path_of(name);
      if (fs::exists(p))
        throw IoError(p + " already exists; pass --overwrite to replace it");
    }
  }

  void write(const std::string& name, const std::string& content,
             bool record = true) {
    write_text_file(path_of(name), content);
    if (record) files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  bool overwrite_;
  std::vector<std::string> files_;
};

RunManifest start_manifest(const char* command, const RunConfig& config) {
  RunManifest m;
  m.command = command;
  m.config = config;
  m.config_hash = config_hash_hex(config);
  m.started_at = iso8601_utc_now();
  return m;
}

void finish_manifest(RunManifest& m, OutputWriter& writer) {
  m.files = writer.files();
  m.finished_at = iso8601_utc_now();
  writer.write("manifest.json", dump_manifest(m), /*record=*/false);
}

}  // namespace

std::string slug(const std::string& text) {
  std::string out;
  bool pending_sep = false;
  for (char c : text) {
    bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
                c == '+' || c == '-';
    if (keep) {
      if (pending_sep && !out.empty()) out += '_';
      pending_sep = false;
      out += c;
    } else {
      pending_sep = true;
    }
  }
  return out.empty() ? "x" : out;
}

std::string resolve_output_dir(const RunConfig& config,
                               const std::string& flag_out,
                               const std::string& command) {
  if (!flag_out.empty()) return flag_out;
  if (!config.output_dir.empty()) return config.output_dir;
  const char* root = std::getenv("ANYLR_OUT");
  std::string base = (root && *root) ? root : "anylr-out";
  return base + "/" + command + "_" + config_hash_hex(config).substr(0, 12);
}

void cmd_simulate(const RunConfig& config, const CommandOptions& opts) {
  config.validate();
  if (config.schedules.empty())
    throw ConfigError("simulate: config needs at least one schedule");
  if (config.checkpoints.empty())
    throw ConfigError("simulate: config needs a checkpoint list");
  long n_steps = config.checkpoints.back();

  struct Job {
    const Schedule* sched;
    std::vector<AveragingConfig> averaging;
    std::string name;
  };
  std::vector<Job> jobs;
  for (std::size_t si = 0; si < config.schedules.size(); ++si) {
    const Schedule& s = config.schedules[si];
    std::string stem = "trace_s" + std::to_string(si) + "_" + slug(s.label());
    if (config.averaging.empty()) {
      jobs.push_back({&s, {}, stem});
    } else {
      for (const AveragingConfig& a : config.averaging)
        jobs.push_back({&s, {a}, stem + "__" + slug(a.label())});
    }
  }

  RunManifest manifest = start_manifest("simulate", config);
  struct Result {
    std::string csv;
    std::string status;
    long died_at = -1;
  };
  std::vector<Result> results(jobs.size());
  run_parallel(jobs.size(), opts.jobs, [&](std::size_t i) {
    try {
      RiskTrace trace = run_trajectory(config.problem, *jobs[i].sched, n_steps,
                                       jobs[i].averaging, config.checkpoints);
      std::ostringstream csv;
      write_trace_csv(trace, csv);
      results[i].csv = csv.str();
      results[i].status = "ok";
    } catch (const DivergenceError& e) {
      results[i].status = std::string("diverged: ") + e.what();
      results[i].died_at = e.step;
    }
  });

  OutputWriter writer(opts);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (results[i].died_at < 0) names.push_back(jobs[i].name + ".csv");
  names.push_back("manifest.json");
  writer.precheck(names);

  std::size_t n_diverged = 0;
  long first_died = -1;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (results[i].died_at < 0) {
      writer.write(jobs[i].name + ".csv", results[i].csv);
    } else {
      ++n_diverged;
      if (first_died < 0) first_died = results[i].died_at;
    }
    manifest.runs.push_back({jobs[i].name, results[i].status});
  }
  finish_manifest(manifest, writer);

  if (n_diverged > 0)
    throw DivergenceError("simulate: " + std::to_string(n_diverged) + " of " +
                              std::to_string(jobs.size()) +
                              " runs diverged; statuses recorded in " +
                              writer.path_of("manifest.json"),
                          first_died);
}

void cmd_envelope(const RunConfig& config, const CommandOptions& opts) {
  config.validate();
  if (config.horizons.empty())
    throw ConfigError("envelope: config needs a horizon list");
  if (config.lr_grid.empty())
    throw ConfigError("envelope: config needs grids.lrs or grids.lr_fracs");
  for (const Schedule& s : config.schedules)
    if (s.horizon_dependent())
      throw ConfigError("envelope: schedule " + s.label() +
                        " is horizon dependent; anytime methods must be, and "
                        "wsd goes through the wsd block");

  std::vector<AveragingConfig> avg_grid = config.averaging;
  if (avg_grid.empty()) avg_grid.push_back(AveragingConfig::none());

  RunManifest manifest = start_manifest("envelope", config);
  Spectrum spectrum = build_spectrum(config.problem);
  double noise = config.problem.noise_var;

  CosineEnvelopeOptions eopts;
  eopts.warmup_frac = config.envelope_warmup_frac;
  eopts.floor_frac = config.envelope_floor_frac;
  eopts.jobs = opts.jobs;
  std::vector<EnvelopePoint> envelope = build_cosine_envelope(
      spectrum, noise, config.horizons, config.lr_grid, avg_grid, eopts);
  std::vector<double> env_risk;
  for (const EnvelopePoint& p : envelope) env_risk.push_back(p.best_risk);
  manifest.runs.push_back({"envelope", "ok"});

  std::vector<double> hx = to_double(config.horizons);
  std::vector<std::pair<std::string, std::vector<GapRow>>> methods;
  std::vector<FigureSeries> risk_series{{"envelope", hx, env_risk}};
  std::vector<FigureSeries> delta_series;

  auto add_method = [&](const std::string& name,
                        const std::vector<double>& risks) {
    methods.emplace_back(name, make_gap_report(config.horizons, risks, env_risk));
    risk_series.push_back({name, hx, risks});
    std::vector<double> deltas;
    for (const GapRow& row : methods.back().second)
      deltas.push_back(row.relative_delta);
    delta_series.push_back({name, hx, deltas});
    manifest.runs.push_back({"method " + name, "ok"});
  };

  for (const Schedule& s : config.schedules) {
    AnytimeSeries series =
        evaluate_anytime(spectrum, noise, s, avg_grid, config.horizons);
    add_method(slug(s.label()), series.best_risk);
  }
  if (config.wsd) {
    WsdBranchTable table =
        wsd_branches(spectrum, noise, config.wsd->base_lr, config.horizons,
                     config.wsd->decay_fracs, config.wsd->floor_frac, opts.jobs);
    add_method("wsd_eta_" + slug(fmt_g(config.wsd->base_lr)), table.best_risk);
  }

  std::ostringstream env_csv, gap_csv;
  write_envelope_csv(envelope, env_csv);
  write_gap_csv(methods, gap_csv);
  std::string title = "a=" + fmt_g(config.problem.capacity) +
                      ", b=" + fmt_g(config.problem.source) +
                      ", d=" + std::to_string(config.problem.dimension) +
                      ", noise=" + fmt_g(noise);
  std::string svg =
      render_two_panel_svg(title, risk_series, "excess risk", delta_series,
                           "relative gap to envelope", "steps");

  OutputWriter writer(opts);
  writer.precheck({"envelope.csv", "gap.csv", "figure.svg", "manifest.json"});
  writer.write("envelope.csv", env_csv.str());
  writer.write("gap.csv", gap_csv.str());
  writer.write("figure.svg", svg);
  finish_manifest(manifest, writer);
}

void cmd_rates(const RunConfig& config, const CommandOptions& opts) {
  config.validate();
  if (config.horizons.size() < 4)
    throw ConfigError("rates: config needs at least 4 horizons for a slope fit");
  std::vector<std::pair<double, double>> instances = config.rates.instances;
  if (instances.empty())
    instances.emplace_back(config.problem.capacity, config.problem.source);

  RunManifest manifest = start_manifest("rates", config);
  struct Row {
    double capacity, source, gamma, eta;
    double predicted, fitted, r_squared;
    bool diverged = false;
    bool pass = false;
  };
  std::vector<Row> rows(instances.size());
  std::vector<double> hx = to_double(config.horizons);
  run_parallel(instances.size(), opts.jobs, [&](std::size_t i) {
    ProblemSpec inst = config.problem;
    inst.capacity = instances[i].first;
    inst.source = instances[i].second;
    inst.validate();
    double eta = config.rates.eta_frac * max_stable_lr(inst);
    double gamma = optimal_gamma(inst.capacity, inst.source);
    Schedule sched = gamma > 0.0 ? Schedule::poly_decay(eta, gamma)
                                 : Schedule::constant(eta);
    AnytimeSeries series =
        evaluate_anytime(inst, sched, {AveragingConfig::tail_fraction(1.0)},
                         config.horizons);
    Row& r = rows[i];
    r.capacity = inst.capacity;
    r.source = inst.source;
    r.gamma = gamma;
    r.eta = eta;
    r.predicted = predicted_exponent(inst.capacity, inst.source);
    bool usable = true;
    for (double v : series.best_risk)
      if (!std::isfinite(v) || v <= 0.0) usable = false;
    if (!usable) {
      r.diverged = true;
      r.fitted = r.r_squared = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    RateFit fit = fit_rate_exponent(hx, series.best_risk);
    r.fitted = -fit.slope;
    r.r_squared = fit.r_squared;
    r.pass = std::abs(r.fitted - r.predicted) <= config.rates.tolerance;
  });

  std::ostringstream csv;
  csv << "capacity,source,gamma,eta,predicted_exponent,fitted_exponent,"
         "r_squared,tolerance,status\n";
  std::size_t n_bad = 0;
  for (const Row& r : rows) {
    const char* status = r.diverged ? "diverged" : r.pass ? "pass" : "fail";
    if (!r.pass) ++n_bad;
    csv << fmt_full(r.capacity) << ',' << fmt_full(r.source) << ','
        << fmt_full(r.gamma) << ',' << fmt_full(r.eta) << ','
        << fmt_full(r.predicted) << ',' << fmt_full(r.fitted) << ','
        << fmt_full(r.r_squared) << ',' << fmt_full(config.rates.tolerance)
        << ',' << status << '\n';
    manifest.runs.push_back(
        {"a" + fmt_g(r.capacity) + "_b" + fmt_g(r.source), status});
  }

  OutputWriter writer(opts);
  writer.precheck({"rates.csv", "manifest.json"});
  writer.write("rates.csv", csv.str());
  finish_manifest(manifest, writer);

  if (n_bad > 0)
    throw std::runtime_error("rates: " + std::to_string(n_bad) + " of " +
                             std::to_string(rows.size()) +
                             " instances missed the predicted exponent; see " +
                             writer.path_of("rates.csv"));
}

void cmd_validate(const RunConfig& config, const CommandOptions& opts) {
  config.validate();
  if (config.schedules.empty())
    throw ConfigError("validate: config needs at least one schedule");
  if (config.checkpoints.empty())
    throw ConfigError("validate: config needs a checkpoint list");
  bool corrupted = config.coupling_scale != 1.0;
  if (corrupted && !config.averaging.empty())
    throw ConfigError(
        "validate: coupling_scale != 1 compares last iterates only; clear "
        "the averaging list");
  long n_steps = config.checkpoints.back();

  RunManifest manifest = start_manifest("validate", config);
  Spectrum spectrum = build_spectrum(config.problem);
  double noise = config.problem.noise_var;

  std::ostringstream zcsv;
  zcsv << "schedule,column,step,z\n";
  struct PerSchedule {
    std::string name;
    std::string exact_csv, mc_csv;
    std::string status;
    bool pass = false;
  };
  std::vector<PerSchedule> outcomes;

  for (std::size_t si = 0; si < config.schedules.size(); ++si) {
    const Schedule& sched = config.schedules[si];
    std::string name = "s" + std::to_string(si) + "_" + slug(sched.label());

    RiskTrace exact;
    if (!corrupted) {
      exact = run_trajectory(spectrum, noise, sched, n_steps, config.averaging,
                             config.checkpoints);
    } else {
      MomentRecursion rec(spectrum, noise, config.coupling_scale);
      std::size_t ci = 0;
      auto record = [&](long t) {
        while (ci < config.checkpoints.size() && config.checkpoints[ci] == t) {
          exact.steps.push_back(t);
          exact.lr.push_back(t == 0 ? 0.0 : sched.lr_at(t));
          exact.excess_last.push_back(rec.excess_risk());
          ++ci;
        }
      };
      record(0);
      for (long t = 1; t <= n_steps; ++t) {
        rec.step(sched.lr_at(t));
        record(t);
      }
    }

    MonteCarloOptions mopts;
    mopts.batch_size = config.seeds.batch_size;
    mopts.n_seeds = config.seeds.n_seeds;
    mopts.seed_base = config.seeds.seed_base;
    mopts.jobs = opts.jobs;
    MonteCarloTable mc = monte_carlo_risk(spectrum, noise, sched, n_steps,
                                          config.averaging, config.checkpoints,
                                          mopts);
    AgreementReport report = compare_with_exact(mc, exact);

    for (std::size_t c = 0; c < report.column_labels.size(); ++c)
      for (std::size_t k = 0; k < report.checkpoints.size(); ++k)
        zcsv << name << ',' << report.column_labels[c] << ','
             << report.checkpoints[k] << ',' << fmt_full(report.z[c][k])
             << '\n';

    PerSchedule out;
    out.name = name;
    out.pass = report.pass;
    out.status = report.pass
                     ? "pass"
                     : "fail: max|z|=" + fmt_g(report.max_abs_z) + " over " +
                           std::to_string(report.cells_compared) + " cells";
    std::ostringstream ecsv, mcsv;
    write_trace_csv(exact, ecsv);
    write_monte_carlo_csv(mc, mcsv);
    out.exact_csv = ecsv.str();
    out.mc_csv = mcsv.str();
    outcomes.push_back(std::move(out));
  }

  OutputWriter writer(opts);
  std::vector<std::string> names{"zscores.csv", "manifest.json"};
  for (const PerSchedule& o : outcomes) {
    names.push_back("exact_" + o.name + ".csv");
    names.push_back("mc_" + o.name + ".csv");
  }
  writer.precheck(names);
  writer.write("zscores.csv", zcsv.str());
  std::size_t n_fail = 0;
  for (const PerSchedule& o : outcomes) {
    writer.write("exact_" + o.name + ".csv", o.exact_csv);
    writer.write("mc_" + o.name + ".csv", o.mc_csv);
    manifest.runs.push_back({o.name, o.status});
    if (!o.pass) ++n_fail;
  }
  finish_manifest(manifest, writer);

  if (n_fail > 0)
    throw std::runtime_error(
        "validate: agreement failed for " + std::to_string(n_fail) + " of " +
        std::to_string(outcomes.size()) + " schedules; see " +
        writer.path_of("zscores.csv"));
}

}  // namespace anylr
