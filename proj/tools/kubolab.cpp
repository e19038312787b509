#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "kubolab/config.hpp"
#include "kubolab/experiment.hpp"

#ifndef KUBOLAB_CONFIG_DIR
#define KUBOLAB_CONFIG_DIR "configs"
#endif

namespace {

enum ExitCode { ok = 0, runtime_failure = 1, config_error = 2, threshold_failure = 3 };

int report_config_error(const kubolab::ConfigError& e) {
  std::cerr << "config error\n";
  for (const auto& i : e.issues()) std::cerr << "  " << (i.path.empty() ? "<root>" : i.path) << ": " << i.message << "\n";
  return config_error;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kubolab: linear response experiments on gapped lattice fermions"};
  app.require_subcommand(1);

  std::string config_path, out_dir, examples_dir = KUBOLAB_CONFIG_DIR;
  int threads = 1;
  long budget = -1;
  long long seed = -1;
  bool no_plots = false;

  auto* validate = app.add_subcommand("validate", "check a config and print its normalised echo");
  validate->add_option("--config", config_path, "config file")->required();
  validate->add_option("--seed", seed, "override the config seed");

  auto* run = app.add_subcommand("run", "run an experiment and write results.csv, summary.json, plots.svg");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (default: the config's output field)");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--budget-seconds", budget, "wall-clock budget; remaining grid points are skipped")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "override the config seed")->check(CLI::NonNegativeNumber);
  run->add_flag("--no-plots", no_plots, "skip plots.svg");

  auto* list = app.add_subcommand("list-examples", "list the shipped example configs");
  list->add_option("--dir", examples_dir, "directory to list");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      std::vector<std::filesystem::path> files;
      if (std::filesystem::is_directory(examples_dir))
        for (const auto& e : std::filesystem::directory_iterator(examples_dir))
          if (e.path().extension() == ".json") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        std::string kind = "?";
        try {
          kind = kubolab::load_config(f.string()).kind;
        } catch (const std::exception&) {
          kind = "invalid";
        }
        std::cout << f.string() << "  " << kind << "\n";
      }
      return ok;
    }

    auto cfg = kubolab::load_config(config_path);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (*validate) {
      std::cout << kubolab::to_json(cfg).dump(2) << "\n";
      return ok;
    }

    kubolab::RunOptions ro;
    ro.threads = threads;
    if (budget >= 0) ro.budget_seconds = static_cast<double>(budget);
    ro.plots = !no_plots;
    auto result = kubolab::run_experiment(cfg, ro);
    auto dir = kubolab::write_outputs(result, out_dir.empty() ? cfg.output : out_dir);
    std::cout << "kind " << cfg.kind << ": " << (result.passed ? "passed" : "FAILED")
              << (result.complete ? "" : " (incomplete)") << ", outputs in " << dir.string() << "\n";
    return result.passed ? ok : threshold_failure;
  } catch (const kubolab::ConfigError& e) {
    return report_config_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return runtime_failure;
  }
}
