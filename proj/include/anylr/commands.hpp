#pragma once

#include <string>

#include "anylr/config.hpp"

namespace anylr {

// Resolved output settings for one command invocation. out_dir is created on
// demand; with overwrite false an existing output file raises IoError before
// anything is clobbered (fail-if-exists policy).
struct CommandOptions {
  std::string out_dir;
  int jobs = 1;
  bool overwrite = false;
};

// Flag > config > environment root: an explicit --out wins, then the
// config's output_dir, then $ANYLR_OUT (or ./anylr-out) extended with
// "<command>_<hash12>" so distinct configs land in distinct directories.
std::string resolve_output_dir(const RunConfig& config,
                               const std::string& flag_out,
                               const std::string& command);

// Every command validates its config slice, writes its data files, then a
// manifest.json listing them with per-run statuses. Failures after the
// manifest is written still throw, so exit codes reflect them.

// One trace CSV per (schedule, averaging) pair; an empty averaging list
// yields one bare last-iterate trace per schedule. Trajectories run to the
// last checkpoint. Throws DivergenceError after the manifest when any run
// aborted on divergence.
void cmd_simulate(const RunConfig& config, const CommandOptions& opts);

// envelope.csv (per-horizon tuned cosine), gap.csv (one block per anytime
// method), figure.svg (log-log risk panel over a linear relative-gap
// panel). Methods: every horizon-free schedule in the config, evaluated
// with best-over-averaging per horizon, plus a warmup-stable-decay sweep
// when the wsd block is present. Deterministic: a rerun writes
// byte-identical data files.
void cmd_envelope(const RunConfig& config, const CommandOptions& opts);

// rates.csv: per (capacity, source) instance, runs the poly-decay schedule
// at the theoretically best exponent (constant when that exponent is zero)
// with whole-run averaging over the config horizons, fits the log-log
// slope, and compares against the predicted decay exponent. Throws
// runtime_error after writing when any instance misses its tolerance.
void cmd_rates(const RunConfig& config, const CommandOptions& opts);

// Exact-vs-Monte-Carlo agreement per schedule: zscores.csv with one row per
// (schedule, column, checkpoint), plus the exact trace and sampled table per
// schedule. coupling_scale != 1 deliberately corrupts the exact engine
// (negative control; last-iterate columns only). Throws runtime_error after
// writing when any schedule fails the multiplicity-corrected verdict.
void cmd_validate(const RunConfig& config, const CommandOptions& opts);

// Filesystem-safe method identifier: keeps [A-Za-z0-9.+-], everything else
// becomes '_', runs collapsed. Used for file names and gap.csv method names.
std::string slug(const std::string& text);

}  // namespace anylr
