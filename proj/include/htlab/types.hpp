#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace htlab {

// Binary treatment assignment vector, one entry per unit.
using Assignment = std::vector<std::uint8_t>;

// A treatment-exposure combination: own treatment z in {0,1} and the
// exposure level e the unit's neighborhood induces.
struct TreatmentExposure {
  int z = 0;
  int e = 0;

  friend bool operator==(const TreatmentExposure& a, const TreatmentExposure& b) {
    return a.z == b.z && a.e == b.e;
  }
  friend bool operator!=(const TreatmentExposure& a, const TreatmentExposure& b) {
    return !(a == b);
  }
};

inline std::uint64_t pack_assignment(const Assignment& z) {
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i]) mask |= (std::uint64_t{1} << i);
  }
  return mask;
}

}  // namespace htlab
