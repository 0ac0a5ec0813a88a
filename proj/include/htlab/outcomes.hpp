#pragma once

#include <string>
#include <vector>

#include "htlab/exposure.hpp"
#include "htlab/graph.hpp"
#include "htlab/types.hpp"

namespace htlab {

/// Potential outcomes Y_i(z, e), stored densely per unit over the 2*K_i
/// model combinations. Immutable in use; built once, then read.
class PotentialOutcomeTable {
 public:
  PotentialOutcomeTable(const InterferenceGraph& g, ExposureModel m, double fill = 0.0);

  int num_units() const { return n_; }
  int levels(int unit) const { return levels_[unit]; }
  bool covers(int unit, int z, int e) const;
  double value(int unit, int z, int e) const;  // throws, naming unit and level
  void set(int unit, int z, int e, double v);

  // Flat view in (unit, z, e) order; used by linearity checks and hashing.
  const std::vector<double>& flat(int unit) const { return y_[unit]; }

 private:
  int n_;
  std::vector<int> levels_;
  std::vector<std::vector<double>> y_;  // [unit][z * K_i + e]
};

struct Estimand {
  TreatmentExposure tau1;
  TreatmentExposure tau0;
  std::string name;  // optional preset label
};

// Presets: TTE = (1,1) vs (0,0); DIRECT = (1,0) vs (0,0);
// ADDITIVE_INTERFERENCE = (0,1) vs (0,0). Arbitrary contrasts are first-class;
// presets are conveniences.
Estimand estimand_preset(const std::string& name);
Estimand make_estimand(TreatmentExposure tau1, TreatmentExposure tau0);

// theta(tau1, tau0) = (1/n) sum_i (Y_i(tau1) - Y_i(tau0)).
double true_effect(const PotentialOutcomeTable& table, const Estimand& est);

struct ObservedData {
  Assignment z;
  std::vector<int> exposure;
  std::vector<double> outcome;
};

// Consistency: each unit observes the table value at its realized (z_i, e_i).
ObservedData realize(const PotentialOutcomeTable& table, ExposureModel m,
                     const InterferenceGraph& g, const Assignment& z);

// Uniform values in [lo, hi] for every model combination; deterministic per seed.
PotentialOutcomeTable random_table(const InterferenceGraph& g, ExposureModel m,
                                   double lo, double hi, std::uint64_t seed);

// CSV rows: unit,z,e,value
PotentialOutcomeTable load_table_csv(const std::string& path,
                                     const InterferenceGraph& g, ExposureModel m);
void save_table_csv(const PotentialOutcomeTable& table, const std::string& path);

}  // namespace htlab
