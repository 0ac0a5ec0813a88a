#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "htlab/errors.hpp"
#include "htlab/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"htlab: exact verification engine for inverse-probability-weighted "
               "effect estimation under network interference"};
  app.set_version_flag("--version", std::string("htlab ") + htlab::kToolVersion);

  std::string config_path;
  htlab::ScenarioOverrides overrides;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_dir, mode;
  long long mc_reps = 0;

  CLI::App* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "override the config seed");
  CLI::Option* workers_opt =
      run->add_option("--workers", workers, "worker threads for module internals");
  CLI::Option* out_opt = run->add_option("--out", out_dir, "override the output directory");
  CLI::Option* mode_opt =
      run->add_option("--mode", mode, "exact | mc")->check(CLI::IsMember({"exact", "mc"}));
  CLI::Option* reps_opt = run->add_option("--mc-reps", mc_reps, "Monte Carlo replicates");
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    htlab::ScenarioConfig cfg = htlab::parse_config(config_path);
    if (*seed_opt) overrides.seed = seed;
    if (*workers_opt) overrides.workers = workers;
    if (*out_opt) overrides.out_dir = out_dir;
    if (*mode_opt) overrides.mode = mode;
    if (*reps_opt) overrides.mc_reps = mc_reps;
    const htlab::RunResult result = htlab::run_scenario(std::move(cfg), overrides);
    for (const std::string& note : result.notes) std::cerr << "note: " << note << '\n';
    for (const std::string& file : result.files_written) std::cout << file << '\n';
    return 0;
  } catch (const htlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const htlab::EnumerationBudgetError& e) {
    std::cerr << "enumeration error: " << e.what() << '\n';
    return 3;
  } catch (const htlab::PositivityError& e) {
    std::cerr << "positivity error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
