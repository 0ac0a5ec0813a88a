#pragma once

#include <optional>
#include <string>
#include <vector>

#include "htlab/design.hpp"
#include "htlab/exposure.hpp"
#include "htlab/graph.hpp"
#include "htlab/types.hpp"

namespace htlab {

/// Per-unit propensity scores pi_i(z, e) over all model combinations,
/// tagged with how they were computed. Entries at combinations the design
/// never produces are 0, not errors.
struct PropensityTable {
  int n = 0;
  std::vector<int> levels;                 // K_i per unit
  std::vector<std::vector<double>> pi;     // [unit][z * K_i + e]
  std::vector<std::vector<double>> se;     // same shape; empty unless MC
  std::string method;                      // exact | analytic | montecarlo | mixed
  std::vector<std::vector<std::string>> entry_method;  // per entry when mixed
  long long reps = 0;

  double value(int unit, TreatmentExposure tau) const;
  double stderr_of(int unit, TreatmentExposure tau) const;
  bool has_combo(int unit, TreatmentExposure tau) const;
};

double propensity_exact(const Design& d, const InterferenceGraph& g, ExposureModel m,
                        int unit, TreatmentExposure tau);

// Closed forms for the covered (design, model) pairs:
//   {CRD, Bernoulli} x {SymmetricCount, BinaryAnyTreated}
//   Cluster x BinaryAnyTreated (units must have a same-cluster neighbor
//   unless isolated; otherwise no formula applies and nullopt is returned).
std::optional<double> propensity_analytic(const Design& d, const InterferenceGraph& g,
                                          ExposureModel m, int unit,
                                          TreatmentExposure tau);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

McEstimate propensity_mc(const Design& d, const InterferenceGraph& g, ExposureModel m,
                         int unit, TreatmentExposure tau, long long reps,
                         std::uint64_t seed);

PropensityTable propensity_table_exact(const Design& d, const InterferenceGraph& g,
                                       ExposureModel m);
// Analytic where a formula exists, exact enumeration elsewhere.
PropensityTable propensity_table_analytic(const Design& d, const InterferenceGraph& g,
                                          ExposureModel m);
PropensityTable propensity_table_mc(const Design& d, const InterferenceGraph& g,
                                    ExposureModel m, long long reps, std::uint64_t seed);

// Units violating the positivity precondition 0 < pi < 1 at tau1 or tau0.
struct PositivityViolation {
  int unit;
  TreatmentExposure tau;
  double pi;
};
std::vector<PositivityViolation> positivity_violations(const PropensityTable& table,
                                                       TreatmentExposure tau1,
                                                       TreatmentExposure tau0);

// alpha_i(1, e) = E[ 1(Z_i = 1, E_i = e) / sum(Z) ], with the summand taken
// as 0 when no unit is treated. Exact mode enumerates; analytic mode uses the
// CRD closed form (equal to the unconditional expectation) and, for
// Bernoulli, the conditional-on-(sum Z >= 1) form with the normalized
// binomial over {1, ..., n}. Requires CRD or Bernoulli with SymmetricCount.
double alpha_inclusion_exact(const Design& d, const InterferenceGraph& g,
                             ExposureModel m, int unit, int exposure);
double alpha_inclusion_analytic(const Design& d, const InterferenceGraph& g,
                                ExposureModel m, int unit, int exposure);

}  // namespace htlab
