#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anylr/averaging.hpp"
#include "anylr/problem.hpp"
#include "anylr/schedule.hpp"

namespace anylr {

inline constexpr const char* kToolVersion = "0.3.0";

// Seed policy for Monte Carlo validation runs. seed i of a run draws from
// stream key seed_base + i.
struct SeedPolicy {
  std::uint64_t seed_base = 0;
  std::size_t n_seeds = 2;
  std::size_t batch_size = 1;
};

// Optional warmup-stable-decay sweep for the envelope command: one shared
// constant-rate trunk at base_lr, branches over decay_fracs.
struct WsdSweepConfig {
  double base_lr = 0.0;
  std::vector<double> decay_fracs;
  double floor_frac = 0.0;
};

// Rate-fit protocol: each (capacity, source) instance reuses the problem's
// dimension, noise and scale constants. eta stays a fraction of 1/Tr(H)
// because the trace differs per instance.
struct RateCheckConfig {
  std::vector<std::pair<double, double>> instances;  // (capacity, source)
  double eta_frac = 0.5;
  double tolerance = 0.1;
};

// Everything a command run needs, parsed from one strict JSON document.
// Unknown keys anywhere in the document are errors; validate() runs before
// any compute. Rates given as fractions of 1/Tr(H) in the document
// (base_lr_frac, lr_fracs) are resolved to absolute values at parse time,
// so the canonical form carries absolute rates only.
struct RunConfig {
  ProblemSpec problem;
  std::vector<Schedule> schedules;
  std::vector<AveragingConfig> averaging;
  std::vector<long> horizons;
  std::vector<long> checkpoints;
  std::vector<double> lr_grid;  // envelope rate grid, absolute
  SeedPolicy seeds;
  std::string output_dir;
  int jobs = 1;
  double envelope_warmup_frac = 0.0;
  double envelope_floor_frac = 0.0;
  std::optional<WsdSweepConfig> wsd;
  RateCheckConfig rates;
  double coupling_scale = 1.0;  // negative-control hook; 1.0 = honest dynamics

  void validate() const;  // throws ConfigError
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Accepts either a config document or a manifest (recognized by its
// config_hash key); a manifest contributes its embedded config, which is
// how a finished run is re-executed from its manifest alone.
RunConfig load_run_config_or_manifest(const std::string& path);

// Canonical form: alphabetically ordered keys, every field present, absolute
// rates, 2-space indent, LF endings. parse(canonical(c)) reproduces c bit
// for bit, and the hash below is taken over this string, which makes it
// independent of the field ordering of the source document.
std::string canonical_config_json(const RunConfig& config);

// FNV-1a 64 over canonical_config_json.
std::uint64_t config_hash(const RunConfig& config);
std::string config_hash_hex(const RunConfig& config);

struct RunStatus {
  std::string name;
  std::string status;  // "ok" | "diverged" | "failed: <reason>"
};

// Provenance record written next to the outputs of every command. Embeds the
// full canonical config, so a run can be re-executed from its manifest alone;
// every emitted CSV/SVG is listed in files.
struct RunManifest {
  std::string command;
  RunConfig config;
  std::string config_hash;  // 16 hex digits
  std::string tool_version = kToolVersion;
  std::string started_at;  // ISO 8601 UTC
  std::string finished_at;
  std::vector<RunStatus> runs;
  std::vector<std::string> files;
};

std::string dump_manifest(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& json_text);
RunManifest load_manifest(const std::string& path);

std::string iso8601_utc_now();

// Whole-file text helpers; both throw IoError with the path in the message.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace anylr
