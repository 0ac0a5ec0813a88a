#include <algorithm>

#include "doctest.h"
#include "htlab/errors.hpp"
#include "htlab/exposure.hpp"
#include "htlab/prng.hpp"

using namespace htlab;

TEST_CASE("exposure levels on the path graph") {
  const InterferenceGraph g = path_graph(3);
  const Assignment z = {1, 0, 1};
  CHECK(exposure_level(ExposureModel::SymmetricCount, g, z, 1) == 2);
  CHECK(exposure_level(ExposureModel::BinaryAnyTreated, g, z, 1) == 1);

  const InterferenceGraph isolated = edgeless_graph(3);
  CHECK(exposure_level(ExposureModel::SymmetricCount, isolated, z, 0) == 0);
  CHECK(exposure_level(ExposureModel::BinaryAnyTreated, isolated, z, 0) == 0);

  CHECK_THROWS_AS(exposure_level(ExposureModel::SymmetricCount, g, {1, 0}, 0),
                  ValidationError);
}

TEST_CASE("level counts") {
  const InterferenceGraph star = star_graph(4);  // center degree 3
  CHECK(num_levels(ExposureModel::SymmetricCount, star, 0) == 4);
  CHECK(num_levels(ExposureModel::BinaryAnyTreated, star, 0) == 2);
  const InterferenceGraph star6 = star_graph(6);  // center degree 5
  CHECK(num_levels(ExposureModel::BinaryAnyTreated, star6, 0) == 2);
  const InterferenceGraph isolated = edgeless_graph(2);
  CHECK(num_levels(ExposureModel::SymmetricCount, isolated, 0) == 1);
  CHECK(num_levels(ExposureModel::BinaryAnyTreated, isolated, 0) == 1);
  CHECK(level_attainable(ExposureModel::BinaryAnyTreated, isolated, 0, 0));
  CHECK_FALSE(level_attainable(ExposureModel::BinaryAnyTreated, isolated, 0, 1));
}

TEST_CASE("exposure properties: bounds, monotonicity, locality") {
  Prng rng(7);
  const InterferenceGraph g = cycle_graph(6);
  for (const ExposureModel m :
       {ExposureModel::SymmetricCount, ExposureModel::BinaryAnyTreated}) {
    for (int trial = 0; trial < 200; ++trial) {
      Assignment z(6);
      for (auto& v : z) v = rng.uniform01() < 0.5 ? 1 : 0;
      for (int i = 0; i < 6; ++i) {
        const int e = exposure_level(m, g, z, i);
        CHECK(e >= 0);
        CHECK(e <= num_levels(m, g, i) - 1);

        // Raising any neighbor's treatment never lowers the level.
        for (int j : g.neighbors(i)) {
          if (z[j]) continue;
          Assignment up = z;
          up[j] = 1;
          CHECK(exposure_level(m, g, up, i) >= e);
        }
        // Coordinates outside N_i (and own treatment) do not matter.
        for (int j = 0; j < 6; ++j) {
          const auto& nb = g.neighbors(i);
          if (j == i || std::find(nb.begin(), nb.end(), j) != nb.end()) continue;
          Assignment flip = z;
          flip[j] = flip[j] ? 0 : 1;
          CHECK(exposure_level(m, g, flip, i) == e);
        }
      }
    }
  }
}

TEST_CASE("model names") {
  CHECK(parse_exposure_model("symmetric") == ExposureModel::SymmetricCount);
  CHECK(parse_exposure_model("binary") == ExposureModel::BinaryAnyTreated);
  CHECK_THROWS_WITH_AS(parse_exposure_model("bogus"), doctest::Contains("symmetric"),
                       ConfigError);
}
