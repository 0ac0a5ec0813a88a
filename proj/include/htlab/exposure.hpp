#pragma once

#include <string>

#include "htlab/graph.hpp"
#include "htlab/types.hpp"

namespace htlab {

// Exposure mappings with analytic propensity formulas:
//   SymmetricCount   e_i = |z_{N_i}|, levels {0, ..., d_i}
//   BinaryAnyTreated e_i = 1(|z_{N_i}| >= 1), levels {0, 1}
enum class ExposureModel { SymmetricCount, BinaryAnyTreated };

ExposureModel parse_exposure_model(const std::string& name);  // "symmetric" | "binary"
std::string exposure_model_name(ExposureModel m);

int exposure_level(ExposureModel m, const InterferenceGraph& g, const Assignment& z,
                   int unit);

// Number of exposure levels K_i. An isolated unit has a single level (e = 0)
// under either model; attainability of individual levels is a separate query.
int num_levels(ExposureModel m, const InterferenceGraph& g, int unit);

bool level_attainable(ExposureModel m, const InterferenceGraph& g, int unit, int level);

std::string to_string(const TreatmentExposure& tau);

}  // namespace htlab
