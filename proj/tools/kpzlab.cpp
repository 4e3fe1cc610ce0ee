#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "kpzlab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"kpzlab: line-ensemble, polymer, and stochastic heat equation experiments"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_dir = ".";
  std::string profile = "default";
  std::uint64_t seed = 0;
  int workers = 1;

  for (const std::string& name : kpzlab::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_file, "key=value config file");
    sub->add_option("--seed", seed, "seed root (overridden by KPZLAB_SEED)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker thread count");
    sub->add_option("--profile", profile, "quick | default | paper")
        ->check(CLI::IsMember({"quick", "default", "paper"}));
  }

  CLI11_PARSE(app, argc, argv);
  const std::string subcommand = app.get_subcommands().front()->get_name();

  try {
    kpzlab::ExperimentConfig config = kpzlab::make_config(subcommand, profile);
    config.seed = seed;
    config.out_dir = out_dir;
    config.workers = workers;
    if (!config_file.empty())
      kpzlab::apply_overrides(config, kpzlab::parse_config_file(config_file));
    if (const char* env_seed = std::getenv("KPZLAB_SEED"))
      config.seed = std::stoull(env_seed);

    auto start = std::chrono::steady_clock::now();
    kpzlab::RunReport report = kpzlab::run_experiment(config);
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::string manifest = kpzlab::write_report(report, config, wall);

    for (const auto& [key, value] : report.results)
      std::cout << key << " = " << value << "\n";
    for (const auto& [name, ok] : report.verdicts)
      std::cout << "verdict " << name << ": " << (ok ? "pass" : "fail") << "\n";
    std::cout << "manifest: " << manifest << "\n";
    std::cout << (report.pass ? "PASS" : "FAIL") << "\n";
    return report.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
