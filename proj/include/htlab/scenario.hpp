#pragma once

#include <optional>
#include <string>
#include <vector>

#include "htlab/design.hpp"
#include "htlab/estimators.hpp"
#include "htlab/evaluation.hpp"
#include "htlab/outcomes.hpp"

namespace htlab {

inline constexpr const char* kToolVersion = "0.1.0";

struct DesignSpec {
  std::string kind;  // bernoulli | crd | cluster | independent_set_ate | independent_set_tte
  double p = 0.5;
  int n_t = 0;
  int k_t = 0;
  int n_1 = 0;
  std::string cluster_file;
};

struct TableSpec {
  std::string source;  // file | random
  std::string path;
  double box_lo = 0.0;
  double box_hi = 1.0;
  std::uint64_t seed = 0;
};

struct ScenarioConfig {
  std::string graph_file;
  std::string model;  // symmetric | binary
  DesignSpec design;
  std::optional<TreatmentExposure> tau1, tau0;
  std::string estimand_preset;  // set when named
  std::optional<TableSpec> table;
  std::vector<std::string> tasks;
  std::string mode = "exact";  // exact | mc
  long long mc_reps = 100000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = "out";

  std::string canonical_json() const;
};

ScenarioConfig parse_config(const std::string& path);

struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;
  std::optional<long long> mc_reps;
};

struct RunResult {
  std::vector<std::string> files_written;
  std::vector<std::string> notes;
};

RunResult run_scenario(const ScenarioConfig& config);
RunResult run_scenario(ScenarioConfig config, const ScenarioOverrides& overrides);

// Instantiated pieces of a scenario, exposed for tests and tools.
struct ScenarioInstance {
  InterferenceGraph graph;
  ExposureModel model;
  Design design;
  Estimand estimand;
};
ScenarioInstance instantiate(const ScenarioConfig& config);

}  // namespace htlab
