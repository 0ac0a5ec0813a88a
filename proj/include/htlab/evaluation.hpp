#pragma once

#include <string>
#include <utility>
#include <vector>

#include "htlab/estimators.hpp"

namespace htlab {

struct MomentReport {
  double expectation = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double theta = 0.0;
  std::string mode;  // exact | mc
  long long reps = 0;
  double se_expectation = 0.0;
  double se_variance = 0.0;
  double se_mse = 0.0;
  // |mse - (variance + bias^2)|, an internal consistency figure for exact mode
  // (mse is accumulated independently as E[(v - theta)^2]).
  double identity_gap = 0.0;
};

MomentReport exact_moments(const Estimator& estimator, const Design& d,
                           const InterferenceGraph& g, ExposureModel m,
                           const PotentialOutcomeTable& table, const Estimand& est);

MomentReport mc_moments(const Estimator& estimator, const Design& d,
                        const InterferenceGraph& g, ExposureModel m,
                        const PotentialOutcomeTable& table, const Estimand& est,
                        long long reps, std::uint64_t seed, int workers = 1);

// Table coordinate spaces for sphere/axis grids. The identified space keeps
// only combinations the design actually reveals (exact propensity > 0);
// remaining table entries are zero.
struct TableCoordinate {
  int unit;
  TreatmentExposure tau;
};

struct TableSpace {
  std::vector<TableCoordinate> coords;
  PotentialOutcomeTable to_table(const InterferenceGraph& g, ExposureModel m,
                                 const std::vector<double>& coeffs) const;
};

TableSpace model_table_space(const InterferenceGraph& g, ExposureModel m);
TableSpace identified_table_space(const InterferenceGraph& g, ExposureModel m,
                                  const PropensityTable& exact);

using NamedTable = std::pair<std::string, PotentialOutcomeTable>;

std::vector<NamedTable> sphere_tables(const TableSpace& space,
                                      const InterferenceGraph& g, ExposureModel m,
                                      int count, std::uint64_t seed);
std::vector<NamedTable> axis_tables(const TableSpace& space, const InterferenceGraph& g,
                                    ExposureModel m);

struct DominanceRow {
  std::string table_id;
  double mse_a = 0.0;
  double mse_b = 0.0;
};

// Definition-style verdict restricted to the supplied table set: A dominates B
// when MSE_A <= MSE_B on every table (relative tolerance) and strictly better
// (relative margin) on at least one, which is recorded as the witness.
struct DominanceVerdict {
  std::string estimator_a;
  std::string estimator_b;
  std::string verdict;  // A-dominates | B-dominates | tied | incomparable
  std::string witness_id;
  std::vector<DominanceRow> rows;
  double rel_tol = 0.0;
  double strict_margin = 0.0;
};

DominanceVerdict dominance_check(const Estimator& a, const Estimator& b,
                                 const Design& d, const InterferenceGraph& g,
                                 ExposureModel m, const Estimand& est,
                                 const std::vector<NamedTable>& tables,
                                 double rel_tol = 1e-12, double strict_margin = 1e-9,
                                 int workers = 1);

}  // namespace htlab
