#include "htlab/outcomes.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "htlab/errors.hpp"
#include "htlab/numeric.hpp"
#include "htlab/prng.hpp"

namespace htlab {

PotentialOutcomeTable::PotentialOutcomeTable(const InterferenceGraph& g,
                                             ExposureModel m, double fill)
    : n_(g.num_units()) {
  levels_.resize(n_);
  y_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    levels_[i] = num_levels(m, g, i);
    y_[i].assign(2 * levels_[i], fill);
  }
}

bool PotentialOutcomeTable::covers(int unit, int z, int e) const {
  return unit >= 0 && unit < n_ && (z == 0 || z == 1) && e >= 0 && e < levels_[unit];
}

double PotentialOutcomeTable::value(int unit, int z, int e) const {
  if (!covers(unit, z, e)) {
    throw ValidationError("outcome table: unit " + std::to_string(unit) +
                          " has no level (" + std::to_string(z) + "," +
                          std::to_string(e) + ")");
  }
  return y_[unit][z * levels_[unit] + e];
}

void PotentialOutcomeTable::set(int unit, int z, int e, double v) {
  if (!covers(unit, z, e)) {
    throw ValidationError("outcome table: unit " + std::to_string(unit) +
                          " has no level (" + std::to_string(z) + "," +
                          std::to_string(e) + ")");
  }
  if (!std::isfinite(v)) {
    throw ValidationError("outcome table: non-finite value at unit " +
                          std::to_string(unit));
  }
  y_[unit][z * levels_[unit] + e] = v;
}

Estimand estimand_preset(const std::string& name) {
  if (name == "TTE") return {{1, 1}, {0, 0}, "TTE"};
  if (name == "DIRECT") return {{1, 0}, {0, 0}, "DIRECT"};
  if (name == "ADDITIVE_INTERFERENCE") return {{0, 1}, {0, 0}, "ADDITIVE_INTERFERENCE"};
  throw ConfigError("unknown estimand preset '" + name +
                    "'; valid options: TTE, DIRECT, ADDITIVE_INTERFERENCE");
}

Estimand make_estimand(TreatmentExposure tau1, TreatmentExposure tau0) {
  if (tau1 == tau0) {
    throw ValidationError("estimand: tau1 and tau0 must differ, both are " +
                          to_string(tau1));
  }
  return {tau1, tau0, ""};
}

double true_effect(const PotentialOutcomeTable& table, const Estimand& est) {
  const int n = table.num_units();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += table.value(i, est.tau1.z, est.tau1.e) -
           table.value(i, est.tau0.z, est.tau0.e);
  }
  return sum / static_cast<double>(n);
}

ObservedData realize(const PotentialOutcomeTable& table, ExposureModel m,
                     const InterferenceGraph& g, const Assignment& z) {
  ObservedData obs;
  obs.z = z;
  const int n = g.num_units();
  obs.exposure.resize(n);
  obs.outcome.resize(n);
  for (int i = 0; i < n; ++i) {
    obs.exposure[i] = exposure_level(m, g, z, i);
    obs.outcome[i] = table.value(i, z[i] ? 1 : 0, obs.exposure[i]);
  }
  return obs;
}

PotentialOutcomeTable random_table(const InterferenceGraph& g, ExposureModel m,
                                   double lo, double hi, std::uint64_t seed) {
  if (!(lo <= hi)) throw ValidationError("random_table: need lo <= hi");
  PotentialOutcomeTable table(g, m);
  Prng rng(derive_seed(seed, 0));
  for (int i = 0; i < g.num_units(); ++i) {
    for (int z = 0; z <= 1; ++z) {
      for (int e = 0; e < table.levels(i); ++e) {
        table.set(i, z, e, lo + (hi - lo) * rng.uniform01());
      }
    }
  }
  return table;
}

PotentialOutcomeTable load_table_csv(const std::string& path,
                                     const InterferenceGraph& g, ExposureModel m) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table file: " + path);
  PotentialOutcomeTable table(g, m);
  std::vector<std::vector<char>> filled(g.num_units());
  for (int i = 0; i < g.num_units(); ++i) {
    filled[i].assign(2 * table.levels(i), 0);
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("unit", 0) == 0) continue;  // header
    std::istringstream ss(line);
    std::string cell;
    int unit, z, e;
    double v;
    try {
      std::getline(ss, cell, ',');
      unit = std::stoi(cell);
      std::getline(ss, cell, ',');
      z = std::stoi(cell);
      std::getline(ss, cell, ',');
      e = std::stoi(cell);
      std::getline(ss, cell, ',');
      v = std::stod(cell);
    } catch (const std::exception&) {
      throw ConfigError("table file " + path + ": malformed row " +
                        std::to_string(lineno) + ": " + line);
    }
    if (!table.covers(unit, z, e)) {
      throw ConfigError("table file " + path + ": row " + std::to_string(lineno) +
                        " names combination (" + std::to_string(z) + "," +
                        std::to_string(e) + ") that unit " + std::to_string(unit) +
                        " does not have");
    }
    table.set(unit, z, e, v);
    filled[unit][z * table.levels(unit) + e] = 1;
  }
  for (int i = 0; i < g.num_units(); ++i) {
    for (int z = 0; z <= 1; ++z) {
      for (int e = 0; e < table.levels(i); ++e) {
        if (!filled[i][z * table.levels(i) + e]) {
          throw ConfigError("table file " + path + ": missing value for unit " +
                            std::to_string(i) + " at (" + std::to_string(z) + "," +
                            std::to_string(e) + ")");
        }
      }
    }
  }
  return table;
}

void save_table_csv(const PotentialOutcomeTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write table file: " + path);
  out << "unit,z,e,value\n";
  for (int i = 0; i < table.num_units(); ++i) {
    for (int z = 0; z <= 1; ++z) {
      for (int e = 0; e < table.levels(i); ++e) {
        out << i << ',' << z << ',' << e << ',' << format_double(table.value(i, z, e))
            << '\n';
      }
    }
  }
}

}  // namespace htlab
