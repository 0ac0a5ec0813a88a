#include "htlab/exposure.hpp"

#include "htlab/errors.hpp"

namespace htlab {

ExposureModel parse_exposure_model(const std::string& name) {
  if (name == "symmetric") return ExposureModel::SymmetricCount;
  if (name == "binary") return ExposureModel::BinaryAnyTreated;
  throw ConfigError("unknown exposure model '" + name +
                    "'; valid options: symmetric, binary");
}

std::string exposure_model_name(ExposureModel m) {
  return m == ExposureModel::SymmetricCount ? "symmetric" : "binary";
}

int exposure_level(ExposureModel m, const InterferenceGraph& g, const Assignment& z,
                   int unit) {
  if (static_cast<int>(z.size()) != g.num_units()) {
    throw ValidationError("exposure_level: assignment has length " +
                          std::to_string(z.size()) + ", graph has " +
                          std::to_string(g.num_units()) + " units");
  }
  int treated = 0;
  for (int j : g.neighbors(unit)) treated += z[j] ? 1 : 0;
  if (m == ExposureModel::SymmetricCount) return treated;
  return treated >= 1 ? 1 : 0;
}

int num_levels(ExposureModel m, const InterferenceGraph& g, int unit) {
  const int d = g.degree(unit);
  if (m == ExposureModel::SymmetricCount) return d + 1;
  return d == 0 ? 1 : 2;
}

bool level_attainable(ExposureModel m, const InterferenceGraph& g, int unit,
                      int level) {
  return level >= 0 && level < num_levels(m, g, unit);
}

std::string to_string(const TreatmentExposure& tau) {
  return "(" + std::to_string(tau.z) + "," + std::to_string(tau.e) + ")";
}

}  // namespace htlab
