#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "g4v/experiments.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-IV color center spin-photon toolkit"};
  std::string config_path, out_dir, experiment;
  int threads = -1;
  std::uint64_t seed = 0;
  bool have_seed = false, validate_only = false;
  app.add_option("--config", config_path, "YAML or JSON configuration file");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads (default: available parallelism)");
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { seed = s; have_seed = true; },
                                         "random seed (overrides the config)");
  app.add_option("--experiment", experiment, "experiment kind (overrides the config)");
  app.add_flag("--validate", validate_only, "check the configuration without running it");
  app.set_version_flag("--version", G4V_VERSION);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  g4v::ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? g4v::parse_config_text("") : g4v::load_config(config_path);
  } catch (const g4v::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  if (!experiment.empty()) cfg.experiment = experiment;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (have_seed) cfg.seed = seed;
  if (threads >= 0) cfg.threads = threads;

  const auto problems = g4v::validate(cfg);
  for (const auto& p : problems) std::cerr << "config error: " << p << "\n";
  if (!problems.empty()) return kConfigError;
  if (validate_only) {
    std::cout << "configuration valid\n";
    return 0;
  }

  const int workers =
      cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  try {
    const auto summary = g4v::run_experiment(cfg, workers);
    std::cout << summary.dump(2) << "\n";
  } catch (const g4v::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const g4v::NumericalError& e) {
    std::cerr << "numerical failure in " << cfg.experiment << ": " << e.what() << "\n";
    return kNumericalError;
  } catch (const g4v::PhysicsError& e) {
    std::cerr << "numerical failure in " << cfg.experiment << ": " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error in " << cfg.experiment << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
