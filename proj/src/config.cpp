#include "anylr/config.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "anylr/errors.hpp"
#include "anylr/format.hpp"
#include "json.hpp"

namespace anylr {
namespace {

using nlohmann::json;  // std::map-backed: keys serialize alphabetically

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

std::string idx(const std::string& ctx, std::size_t i) {
  return ctx + "[" + std::to_string(i) + "]";
}

void require_object(const json& node, const std::string& ctx) {
  if (!node.is_object()) fail(ctx + " must be a JSON object");
}

// Unknown keys are errors so a typo in a sweep definition cannot silently
// fall back to a default.
void require_keys(const json& obj, const std::string& ctx,
                  std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail("unknown key \"" + it.key() + "\" in " + ctx);
  }
}

bool has(const json& obj, const char* key) { return obj.contains(key); }

const json& get(const json& obj, const std::string& ctx, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ctx + " is missing required key \"" + key + "\"");
  return *it;
}

double as_double(const json& node, const std::string& ctx) {
  if (!node.is_number()) fail(ctx + " must be a number");
  return node.get<double>();
}

long as_long(const json& node, const std::string& ctx) {
  if (!node.is_number_integer() && !node.is_number_unsigned())
    fail(ctx + " must be an integer");
  return node.get<long>();
}

std::uint64_t as_uint64(const json& node, const std::string& ctx) {
  if (node.is_number_unsigned()) return node.get<std::uint64_t>();
  if (node.is_number_integer()) {
    long long v = node.get<long long>();
    if (v < 0) fail(ctx + " must be >= 0");
    return static_cast<std::uint64_t>(v);
  }
  fail(ctx + " must be an integer");
}

std::string as_string(const json& node, const std::string& ctx) {
  if (!node.is_string()) fail(ctx + " must be a string");
  return node.get<std::string>();
}

double num_field(const json& obj, const std::string& ctx, const char* key) {
  return as_double(get(obj, ctx, key), ctx + "." + key);
}

double num_or(const json& obj, const std::string& ctx, const char* key,
              double fallback) {
  if (!has(obj, key)) return fallback;
  return as_double(obj[key], ctx + "." + key);
}

long int_field(const json& obj, const std::string& ctx, const char* key) {
  return as_long(get(obj, ctx, key), ctx + "." + key);
}

std::vector<double> num_array(const json& node, const std::string& ctx) {
  if (!node.is_array()) fail(ctx + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(as_double(node[i], idx(ctx, i)));
  return out;
}

std::vector<long> int_array(const json& node, const std::string& ctx) {
  if (!node.is_array()) fail(ctx + " must be an array of integers");
  std::vector<long> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(as_long(node[i], idx(ctx, i)));
  return out;
}

// Exactly one of base_lr (absolute) and base_lr_frac (multiple of 1/Tr(H))
// must be given; the parsed schedule always carries the absolute rate.
double base_rate(const json& obj, const std::string& ctx, double unit_lr) {
  bool abs_given = has(obj, "base_lr");
  bool frac_given = has(obj, "base_lr_frac");
  if (abs_given == frac_given)
    fail(ctx + " needs exactly one of \"base_lr\" and \"base_lr_frac\"");
  if (abs_given) return as_double(obj["base_lr"], ctx + ".base_lr");
  return as_double(obj["base_lr_frac"], ctx + ".base_lr_frac") * unit_lr;
}

Schedule parse_schedule(const json& node, const std::string& ctx,
                        double unit_lr) {
  require_object(node, ctx);
  std::string kind = as_string(get(node, ctx, "kind"), ctx + ".kind");
  Schedule s;
  if (kind == "constant") {
    require_keys(node, ctx, {"kind", "base_lr", "base_lr_frac"});
    s = Schedule::constant(base_rate(node, ctx, unit_lr));
  } else if (kind == "poly_decay") {
    require_keys(node, ctx, {"kind", "base_lr", "base_lr_frac", "gamma"});
    s = Schedule::poly_decay(base_rate(node, ctx, unit_lr),
                             num_field(node, ctx, "gamma"));
  } else if (kind == "sqrt_alpha") {
    require_keys(node, ctx, {"kind", "base_lr", "base_lr_frac", "alpha"});
    s = Schedule::sqrt_alpha(base_rate(node, ctx, unit_lr),
                             num_field(node, ctx, "alpha"));
  } else if (kind == "cosine") {
    require_keys(node, ctx,
                 {"kind", "base_lr", "base_lr_frac", "horizon", "warmup_frac",
                  "floor_frac"});
    s = Schedule::cosine(base_rate(node, ctx, unit_lr),
                         int_field(node, ctx, "horizon"),
                         num_or(node, ctx, "warmup_frac", 0.0),
                         num_or(node, ctx, "floor_frac", 0.0));
  } else if (kind == "wsd") {
    require_keys(node, ctx,
                 {"kind", "base_lr", "base_lr_frac", "horizon",
                  "decay_start_frac", "floor_frac"});
    s = Schedule::wsd(base_rate(node, ctx, unit_lr),
                      int_field(node, ctx, "horizon"),
                      num_field(node, ctx, "decay_start_frac"),
                      num_or(node, ctx, "floor_frac", 0.0));
  } else if (kind == "linear_decay") {
    require_keys(node, ctx,
                 {"kind", "base_lr", "base_lr_frac", "horizon", "floor_frac"});
    s = Schedule::linear_decay(base_rate(node, ctx, unit_lr),
                               int_field(node, ctx, "horizon"),
                               num_or(node, ctx, "floor_frac", 0.0));
  } else {
    fail(ctx + ".kind \"" + kind +
         "\" is not one of constant, poly_decay, sqrt_alpha, cosine, wsd, "
         "linear_decay");
  }
  s.validate();
  return s;
}

json schedule_json(const Schedule& s) {
  json j;
  j["base_lr"] = s.base_lr;
  switch (s.kind) {
    case ScheduleKind::Constant:
      j["kind"] = "constant";
      break;
    case ScheduleKind::PolyDecay:
      j["kind"] = "poly_decay";
      j["gamma"] = s.gamma;
      break;
    case ScheduleKind::SqrtAlpha:
      j["kind"] = "sqrt_alpha";
      j["alpha"] = s.alpha;
      break;
    case ScheduleKind::Cosine:
      j["kind"] = "cosine";
      j["horizon"] = s.horizon;
      j["warmup_frac"] = s.warmup_frac;
      j["floor_frac"] = s.floor_frac;
      break;
    case ScheduleKind::Wsd:
      j["kind"] = "wsd";
      j["horizon"] = s.horizon;
      j["decay_start_frac"] = s.decay_start_frac;
      j["floor_frac"] = s.floor_frac;
      break;
    case ScheduleKind::LinearDecay:
      j["kind"] = "linear_decay";
      j["horizon"] = s.horizon;
      j["floor_frac"] = s.floor_frac;
      break;
  }
  return j;
}

AveragingConfig parse_averaging(const json& node, const std::string& ctx) {
  require_object(node, ctx);
  std::string kind = as_string(get(node, ctx, "kind"), ctx + ".kind");
  AveragingConfig a;
  if (kind == "none") {
    require_keys(node, ctx, {"kind"});
    a = AveragingConfig::none();
  } else if (kind == "tail_fraction") {
    require_keys(node, ctx, {"kind", "fraction"});
    a = AveragingConfig::tail_fraction(num_field(node, ctx, "fraction"));
  } else if (kind == "tail_from_step") {
    require_keys(node, ctx, {"kind", "start_step"});
    a = AveragingConfig::tail_from_step(int_field(node, ctx, "start_step"));
  } else if (kind == "ema") {
    require_keys(node, ctx, {"kind", "half_life_frac", "order"});
    EmaUpdateOrder order = EmaUpdateOrder::AfterStep;
    if (has(node, "order")) {
      std::string o = as_string(node["order"], ctx + ".order");
      if (o == "after_step")
        order = EmaUpdateOrder::AfterStep;
      else if (o == "before_step")
        order = EmaUpdateOrder::BeforeStep;
      else
        fail(ctx + ".order \"" + o +
             "\" is not one of after_step, before_step");
    }
    a = AveragingConfig::ema(num_field(node, ctx, "half_life_frac"), order);
  } else {
    fail(ctx + ".kind \"" + kind +
         "\" is not one of none, tail_fraction, tail_from_step, ema");
  }
  a.validate();
  return a;
}

json averaging_json(const AveragingConfig& a) {
  json j;
  switch (a.kind) {
    case AveragingKind::None:
      j["kind"] = "none";
      break;
    case AveragingKind::TailFraction:
      j["kind"] = "tail_fraction";
      j["fraction"] = a.fraction;
      break;
    case AveragingKind::TailFromStep:
      j["kind"] = "tail_from_step";
      j["start_step"] = a.start_step;
      break;
    case AveragingKind::Ema:
      j["kind"] = "ema";
      j["half_life_frac"] = a.half_life_frac;
      j["order"] = a.order == EmaUpdateOrder::AfterStep ? "after_step"
                                                        : "before_step";
      break;
  }
  return j;
}

ProblemSpec parse_problem(const json& node) {
  const std::string ctx = "problem";
  require_object(node, ctx);
  require_keys(node, ctx,
               {"dimension", "capacity", "source", "noise_var", "lambda_scale",
                "signal_scale"});
  ProblemSpec p;
  long dim = int_field(node, ctx, "dimension");
  if (dim < 1) fail("problem.dimension must be >= 1, got " + std::to_string(dim));
  p.dimension = static_cast<std::size_t>(dim);
  p.capacity = num_field(node, ctx, "capacity");
  p.source = num_field(node, ctx, "source");
  p.noise_var = num_field(node, ctx, "noise_var");
  p.lambda_scale = num_or(node, ctx, "lambda_scale", 1.0);
  p.signal_scale = num_or(node, ctx, "signal_scale", 1.0);
  p.validate();
  return p;
}

json problem_json(const ProblemSpec& p) {
  json j;
  j["dimension"] = static_cast<std::int64_t>(p.dimension);
  j["capacity"] = p.capacity;
  j["source"] = p.source;
  j["noise_var"] = p.noise_var;
  j["lambda_scale"] = p.lambda_scale;
  j["signal_scale"] = p.signal_scale;
  return j;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

json config_json(const RunConfig& c) {
  json j;
  j["problem"] = problem_json(c.problem);
  j["schedules"] = json::array();
  for (const Schedule& s : c.schedules) j["schedules"].push_back(schedule_json(s));
  j["averaging"] = json::array();
  for (const AveragingConfig& a : c.averaging)
    j["averaging"].push_back(averaging_json(a));
  j["horizons"] = c.horizons;
  j["checkpoints"] = c.checkpoints;
  j["grids"] = json{{"lrs", c.lr_grid}};
  j["seeds"] = json{{"seed_base", c.seeds.seed_base},
                    {"n_seeds", static_cast<std::int64_t>(c.seeds.n_seeds)},
                    {"batch_size", static_cast<std::int64_t>(c.seeds.batch_size)}};
  j["output_dir"] = c.output_dir;
  j["jobs"] = c.jobs;
  j["envelope"] = json{{"warmup_frac", c.envelope_warmup_frac},
                       {"floor_frac", c.envelope_floor_frac}};
  if (c.wsd) {
    j["wsd"] = json{{"base_lr", c.wsd->base_lr},
                    {"decay_fracs", c.wsd->decay_fracs},
                    {"floor_frac", c.wsd->floor_frac}};
  }
  json instances = json::array();
  for (const auto& [a, b] : c.rates.instances)
    instances.push_back(json{{"capacity", a}, {"source", b}});
  j["rates"] = json{{"instances", instances},
                    {"eta_frac", c.rates.eta_frac},
                    {"tolerance", c.rates.tolerance}};
  j["coupling_scale"] = c.coupling_scale;
  return j;
}

RunConfig config_from_json(const json& node) {
  const std::string ctx = "config";
  require_object(node, ctx);
  require_keys(node, ctx,
               {"problem", "schedules", "averaging", "horizons", "checkpoints",
                "grids", "seeds", "output_dir", "jobs", "envelope", "wsd",
                "rates", "coupling_scale"});
  RunConfig c;
  c.problem = parse_problem(get(node, ctx, "problem"));
  double unit_lr = max_stable_lr(c.problem);

  if (has(node, "schedules")) {
    const json& arr = node["schedules"];
    if (!arr.is_array()) fail("schedules must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      c.schedules.push_back(parse_schedule(arr[i], idx("schedules", i), unit_lr));
  }
  if (has(node, "averaging")) {
    const json& arr = node["averaging"];
    if (!arr.is_array()) fail("averaging must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      c.averaging.push_back(parse_averaging(arr[i], idx("averaging", i)));
  }
  if (has(node, "horizons")) c.horizons = int_array(node["horizons"], "horizons");
  if (has(node, "checkpoints"))
    c.checkpoints = int_array(node["checkpoints"], "checkpoints");

  if (has(node, "grids")) {
    const json& g = node["grids"];
    require_object(g, "grids");
    require_keys(g, "grids", {"lrs", "lr_fracs"});
    if (has(g, "lrs") && has(g, "lr_fracs"))
      fail("grids needs at most one of \"lrs\" and \"lr_fracs\"");
    if (has(g, "lrs")) c.lr_grid = num_array(g["lrs"], "grids.lrs");
    if (has(g, "lr_fracs")) {
      c.lr_grid = num_array(g["lr_fracs"], "grids.lr_fracs");
      for (double& lr : c.lr_grid) lr *= unit_lr;
    }
  }

  if (has(node, "seeds")) {
    const json& s = node["seeds"];
    require_object(s, "seeds");
    require_keys(s, "seeds", {"seed_base", "n_seeds", "batch_size"});
    if (has(s, "seed_base"))
      c.seeds.seed_base = as_uint64(s["seed_base"], "seeds.seed_base");
    if (has(s, "n_seeds")) {
      long n = as_long(s["n_seeds"], "seeds.n_seeds");
      if (n < 2) fail("seeds.n_seeds must be >= 2, got " + std::to_string(n));
      c.seeds.n_seeds = static_cast<std::size_t>(n);
    }
    if (has(s, "batch_size")) {
      long b = as_long(s["batch_size"], "seeds.batch_size");
      if (b < 1) fail("seeds.batch_size must be >= 1, got " + std::to_string(b));
      c.seeds.batch_size = static_cast<std::size_t>(b);
    }
  }

  if (has(node, "output_dir"))
    c.output_dir = as_string(node["output_dir"], "output_dir");
  if (has(node, "jobs")) c.jobs = static_cast<int>(as_long(node["jobs"], "jobs"));

  if (has(node, "envelope")) {
    const json& e = node["envelope"];
    require_object(e, "envelope");
    require_keys(e, "envelope", {"warmup_frac", "floor_frac"});
    c.envelope_warmup_frac = num_or(e, "envelope", "warmup_frac", 0.0);
    c.envelope_floor_frac = num_or(e, "envelope", "floor_frac", 0.0);
  }

  if (has(node, "wsd")) {
    const json& w = node["wsd"];
    require_object(w, "wsd");
    require_keys(w, "wsd", {"base_lr", "base_lr_frac", "decay_fracs", "floor_frac"});
    WsdSweepConfig ws;
    ws.base_lr = base_rate(w, "wsd", unit_lr);
    ws.decay_fracs = num_array(get(w, "wsd", "decay_fracs"), "wsd.decay_fracs");
    ws.floor_frac = num_or(w, "wsd", "floor_frac", 0.0);
    c.wsd = ws;
  }

  if (has(node, "rates")) {
    const json& r = node["rates"];
    require_object(r, "rates");
    require_keys(r, "rates", {"instances", "eta_frac", "tolerance"});
    if (has(r, "instances")) {
      const json& arr = r["instances"];
      if (!arr.is_array()) fail("rates.instances must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string ictx = idx("rates.instances", i);
        require_object(arr[i], ictx);
        require_keys(arr[i], ictx, {"capacity", "source"});
        c.rates.instances.emplace_back(num_field(arr[i], ictx, "capacity"),
                                       num_field(arr[i], ictx, "source"));
      }
    }
    c.rates.eta_frac = num_or(r, "rates", "eta_frac", 0.5);
    c.rates.tolerance = num_or(r, "rates", "tolerance", 0.1);
  }

  if (has(node, "coupling_scale"))
    c.coupling_scale = as_double(node["coupling_scale"], "coupling_scale");

  c.validate();
  return c;
}

json parse_document(const std::string& text, const char* what) {
  json node = json::parse(text, nullptr, false);
  if (node.is_discarded())
    throw ConfigError(std::string(what) + ": malformed JSON document");
  return node;
}

void check_frac(double v, const char* name, bool open_top) {
  bool ok = v >= 0.0 && (open_top ? v < 1.0 : v <= 1.0);
  if (!ok)
    fail(std::string(name) + " must lie in [0,1" + (open_top ? ")" : "]") +
         ", got " + fmt_g(v));
}

}  // namespace

void RunConfig::validate() const {
  problem.validate();
  for (const Schedule& s : schedules) s.validate();
  for (const AveragingConfig& a : averaging) a.validate();
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1)
      fail("horizons must be >= 1, got " + std::to_string(horizons[i]));
    if (i > 0 && horizons[i] <= horizons[i - 1])
      fail("horizons must increase strictly");
  }
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0)
      fail("checkpoints must be >= 0, got " + std::to_string(checkpoints[i]));
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      fail("checkpoints must increase strictly");
  }
  for (double lr : lr_grid)
    if (!(lr > 0.0) || !std::isfinite(lr))
      fail("grid rates must be > 0, got " + fmt_g(lr));
  if (seeds.n_seeds < 2)
    fail("seeds.n_seeds must be >= 2, got " + std::to_string(seeds.n_seeds));
  if (seeds.batch_size < 1) fail("seeds.batch_size must be >= 1");
  if (jobs < 1) fail("jobs must be >= 1, got " + std::to_string(jobs));
  check_frac(envelope_warmup_frac, "envelope.warmup_frac", true);
  check_frac(envelope_floor_frac, "envelope.floor_frac", false);
  if (wsd) {
    if (!(wsd->base_lr > 0.0) || !std::isfinite(wsd->base_lr))
      fail("wsd.base_lr must be > 0, got " + fmt_g(wsd->base_lr));
    if (wsd->decay_fracs.empty()) fail("wsd.decay_fracs must not be empty");
    for (double p : wsd->decay_fracs)
      if (!(p > 0.0 && p < 1.0))
        fail("wsd.decay_fracs must lie in (0,1), got " + fmt_g(p));
    check_frac(wsd->floor_frac, "wsd.floor_frac", false);
  }
  for (const auto& [a, b] : rates.instances) {
    if (!(a > 1.0))
      fail("rates instance capacity must be > 1, got " + fmt_g(a));
    if (!(b > 1.0)) fail("rates instance source must be > 1, got " + fmt_g(b));
  }
  if (!(rates.eta_frac > 0.0))
    fail("rates.eta_frac must be > 0, got " + fmt_g(rates.eta_frac));
  if (!(rates.tolerance > 0.0))
    fail("rates.tolerance must be > 0, got " + fmt_g(rates.tolerance));
  if (!std::isfinite(coupling_scale) || coupling_scale < 0.0)
    fail("coupling_scale must be finite and >= 0, got " + fmt_g(coupling_scale));
}

RunConfig parse_run_config(const std::string& json_text) {
  return config_from_json(parse_document(json_text, "config"));
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_text_file(path));
}

RunConfig load_run_config_or_manifest(const std::string& path) {
  std::string text = read_text_file(path);
  json node = parse_document(text, "config");
  if (node.is_object() && node.contains("config_hash"))
    return parse_manifest(text).config;
  return config_from_json(node);
}

std::string canonical_config_json(const RunConfig& config) {
  config.validate();
  return config_json(config).dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& config) {
  return fnv1a64(canonical_config_json(config));
}

std::string config_hash_hex(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  return std::string(buf);
}

std::string dump_manifest(const RunManifest& manifest) {
  json j;
  j["command"] = manifest.command;
  j["config"] = config_json(manifest.config);
  j["config_hash"] = manifest.config_hash;
  j["tool_version"] = manifest.tool_version;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["runs"] = json::array();
  for (const RunStatus& r : manifest.runs)
    j["runs"].push_back(json{{"name", r.name}, {"status", r.status}});
  j["files"] = manifest.files;
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& json_text) {
  json node = parse_document(json_text, "manifest");
  const std::string ctx = "manifest";
  require_object(node, ctx);
  require_keys(node, ctx,
               {"command", "config", "config_hash", "tool_version",
                "started_at", "finished_at", "runs", "files"});
  RunManifest m;
  m.command = as_string(get(node, ctx, "command"), "manifest.command");
  m.config = config_from_json(get(node, ctx, "config"));
  m.config_hash =
      as_string(get(node, ctx, "config_hash"), "manifest.config_hash");
  m.tool_version =
      as_string(get(node, ctx, "tool_version"), "manifest.tool_version");
  m.started_at = as_string(get(node, ctx, "started_at"), "manifest.started_at");
  m.finished_at =
      as_string(get(node, ctx, "finished_at"), "manifest.finished_at");
  const json& runs = get(node, ctx, "runs");
  if (!runs.is_array()) fail("manifest.runs must be an array");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string rctx = idx("manifest.runs", i);
    require_object(runs[i], rctx);
    require_keys(runs[i], rctx, {"name", "status"});
    m.runs.push_back({as_string(get(runs[i], rctx, "name"), rctx + ".name"),
                      as_string(get(runs[i], rctx, "status"), rctx + ".status")});
  }
  const json& files = get(node, ctx, "files");
  if (!files.is_array()) fail("manifest.files must be an array");
  for (std::size_t i = 0; i < files.size(); ++i)
    m.files.push_back(as_string(files[i], idx("manifest.files", i)));

  // Provenance check: the recorded hash must match the embedded config.
  std::string recomputed = config_hash_hex(m.config);
  if (m.config_hash != recomputed)
    fail("manifest config_hash " + m.config_hash +
         " does not match the embedded config (" + recomputed + ")");
  return m;
}

RunManifest load_manifest(const std::string& path) {
  return parse_manifest(read_text_file(path));
}

std::string iso8601_utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path);
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed on " + path);
}

}  // namespace anylr
