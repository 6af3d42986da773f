#include <CLI11.hpp>
#include <iostream>

#include "lightcone/runner.hpp"

namespace runner = lightcone::runner;

int main(int argc, char** argv) {
  CLI::App app{"Light-cone experiments for power-law interacting systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::optional<int> max_l;

  for (const auto& name : runner::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the `" + name + "` experiment");
    sub->add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed for randomized experiments (overrides the config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--max-l", max_l, "largest lattice extent (overrides the config)")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return runner::kExitValidation;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  runner::ExperimentConfig config;
  try {
    config = config_path.empty() ? runner::ExperimentConfig::parse("", "<defaults>")
                                 : runner::ExperimentConfig::load(config_path);
  } catch (const runner::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return runner::kExitValidation;
  }
  if (!config.experiment().empty() && config.experiment() != name) {
    std::cerr << "validation error: config is for `" << config.experiment() << "`, not `" << name << "`\n";
    return runner::kExitValidation;
  }
  config.set_experiment(name);

  runner::RunOptions opts;
  opts.out_dir = out_dir;
  opts.seed = seed;
  opts.threads = threads;
  opts.max_l = max_l;
  return runner::run(config, opts, std::cout, std::cerr);
}
