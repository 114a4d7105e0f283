#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "anylr/commands.hpp"
#include "anylr/config.hpp"
#include "anylr/errors.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string out;
  int jobs = 0;  // 0: take the value from the config
  bool overwrite = false;
};

void add_common(CLI::App* sub, Flags& flags) {
  sub->add_option("--config", flags.config_path,
                  "config JSON, or a manifest.json to re-execute")
      ->required();
  sub->add_option("--out", flags.out,
                  "output directory (default: the config's output_dir, then "
                  "a hash-named directory under $ANYLR_OUT)");
  sub->add_option("--jobs", flags.jobs, "worker threads (default: config)");
  sub->add_flag("--overwrite", flags.overwrite,
                "replace existing output files instead of failing");
}

int dispatch(const std::string& command, const Flags& flags) {
  anylr::RunConfig config =
      anylr::load_run_config_or_manifest(flags.config_path);
  anylr::CommandOptions opts;
  opts.out_dir = anylr::resolve_output_dir(config, flags.out, command);
  opts.jobs = flags.jobs > 0 ? flags.jobs : config.jobs;
  opts.overwrite = flags.overwrite;
  if (command == "simulate")
    anylr::cmd_simulate(config, opts);
  else if (command == "envelope")
    anylr::cmd_envelope(config, opts);
  else if (command == "rates")
    anylr::cmd_rates(config, opts);
  else
    anylr::cmd_validate(config, opts);
  std::printf("%s: wrote %s\n", command.c_str(), opts.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anytime learning-rate schedule simulator"};
  app.set_version_flag("--version", anylr::kToolVersion);
  app.require_subcommand(1);

  Flags flags;
  CLI::App* sim = app.add_subcommand(
      "simulate", "risk trace CSV per schedule/averaging pair");
  CLI::App* env = app.add_subcommand(
      "envelope", "per-horizon cosine envelope, anytime gaps and figure");
  CLI::App* rates = app.add_subcommand(
      "rates", "fit risk decay exponents against predictions");
  CLI::App* validate = app.add_subcommand(
      "validate", "exact recursion vs Monte Carlo SGD agreement suite");
  for (CLI::App* sub : {sim, env, rates, validate}) add_common(sub, flags);

  CLI11_PARSE(app, argc, argv);

  std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, flags);
  } catch (const anylr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const anylr::DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 3;
  } catch (const anylr::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
