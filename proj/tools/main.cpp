#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ffstab/acceptance.hpp"
#include "ffstab/errors.hpp"
#include "ffstab/experiment.hpp"

namespace {

constexpr const char* kPipelines[] = {"validate", "ltqo",     "flow",   "bounds",
                                      "gapsweep", "highergaps", "sp0scan", "all"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume stability checks for frustration-free chains"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::optional<std::string> out_dir;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool check = false;

  app.add_flag("--check", check, "Run the acceptance suite and exit");
  app.add_option("--seed", seed, "Override the seed list with a single seed");
  app.add_option("--jobs", jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);

  for (const char* name : kPipelines) {
    CLI::App* sub = app.add_subcommand(name, std::string("Run the ") + name + " pipeline");
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--jobs", jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Override the seed list with a single seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (check) {
    ffstab::AcceptanceOptions opts;
    if (seed) opts.seed = *seed;
    const auto results = ffstab::run_acceptance(opts, &std::cout);
    bool ok = true;
    for (const auto& r : results) ok = ok && r.pass;
    return ok ? 0 : 1;
  }

  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const ffstab::ExperimentConfig cfg = ffstab::load_config(config_path);
    ffstab::RunOptions opts;
    opts.out_dir = out_dir;
    opts.jobs = jobs;
    opts.seed = seed;
    return ffstab::run(command, cfg, opts, std::cout);
  } catch (const ffstab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
