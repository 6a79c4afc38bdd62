#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "ftlab/config.hpp"
#include "ftlab/runner.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
};

// Precedence for the output directory: --out, then FTLAB_OUT, then the
// config's 'out' field, then ./ftlab-out.
std::string resolve_out_dir(const CommonOpts& opts, const ftlab::Config& cfg) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (const char* env = std::getenv("FTLAB_OUT"); env && *env) return env;
  return cfg.get_string_or("out", "ftlab-out");
}

void add_common(CLI::App* sub, CommonOpts& opts, bool needs_out) {
  sub->add_option("--config", opts.config_path, "experiment config file")->required();
  if (needs_out) {
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", [&opts](const std::vector<std::string>& vals) {
      opts.seed = std::stoull(vals.at(0));
      return true;
    }, "seed override");
    sub->add_option("--workers", [&opts](const std::vector<std::string>& vals) {
      opts.workers = std::stoi(vals.at(0));
      return true;
    }, "worker count override");
  }
}

int run_command(const CommonOpts& opts) {
  const ftlab::Config cfg = ftlab::Config::from_file(opts.config_path);
  const auto dir =
      ftlab::run_experiment(cfg, resolve_out_dir(opts, cfg), opts.seed, opts.workers);
  std::cout << "wrote " << (dir / "report.json").string() << " and "
            << (dir / "table.csv").string() << "\n";
  return 0;
}

int validate_command(const std::string& path) {
  const ftlab::Config cfg = ftlab::Config::from_file(path);
  const auto diags = ftlab::validate_config(cfg);
  if (diags.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  for (const auto& d : diags) std::cerr << d << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ftlab: fault-tolerance-by-simulation laboratory"};
  app.require_subcommand(1);

  CommonOpts exact_opts, mc_opts, s3_opts, plan_opts;
  std::string validate_path, replay_path;

  add_common(app.add_subcommand("exact-delta",
                                "exact master-equation vs noisy-simulation accuracy"),
             exact_opts, true);
  add_common(app.add_subcommand("mc-sweep", "toric-code logical error rate sweep"), mc_opts,
             true);
  add_common(app.add_subcommand("s3-braiding", "S3 braiding-memory experiment"), s3_opts,
             true);
  add_common(app.add_subcommand("trotter-plan", "stroboscopic error budget"), plan_opts,
             true);
  app.add_subcommand("validate", "check a config without running it")
      ->add_option("--config", validate_path, "experiment config file")
      ->required();
  app.add_subcommand("replay", "rebuild a final state from an event log")
      ->add_option("--log", replay_path, "line-delimited event log")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("exact-delta")) return run_command(exact_opts);
    if (app.got_subcommand("mc-sweep")) return run_command(mc_opts);
    if (app.got_subcommand("s3-braiding")) return run_command(s3_opts);
    if (app.got_subcommand("trotter-plan")) return run_command(plan_opts);
    if (app.got_subcommand("validate")) return validate_command(validate_path);
    if (app.got_subcommand("replay")) {
      std::cout << ftlab::replay_log_file(replay_path);
      return 0;
    }
  } catch (const ftlab::ConfigError& e) {
    std::cerr << e.what();
    if (std::string(e.what()).back() != '\n') std::cerr << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
