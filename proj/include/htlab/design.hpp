#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "htlab/exposure.hpp"
#include "htlab/graph.hpp"
#include "htlab/prng.hpp"
#include "htlab/types.hpp"

namespace htlab {

enum class DesignKind {
  Bernoulli,
  CompletelyRandomized,
  ClusterRandomized,
  IndependentSetAte,
  IndependentSetTte,
};

std::string design_kind_name(DesignKind k);

// Exact enumeration is refused above this many support points.
inline constexpr unsigned long long kEnumerationBudget = 1ULL << 22;

struct SupportList {
  std::vector<Assignment> points;
  std::vector<double> probs;

  std::size_t size() const { return points.size(); }
  // Index of an assignment in enumeration order; npos when outside support.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t index_of(const Assignment& z) const;

 private:
  friend class Design;
  mutable std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// A randomization scheme as an explicit distribution over {0,1}^n.
/// Immutable; safe to share across workers.
class Design {
 public:
  static Design bernoulli(int n, double p);
  static Design completely_randomized(int n, int n_treated);
  static Design cluster_randomized(ClusterPartition partition, int clusters_treated);
  // Independent-set designs: `selected` of the given independent-set units are
  // drawn uniformly without replacement. The ATE variant treats the chosen
  // units only (their neighbors stay control); the TTE variant treats the
  // chosen units and their whole interference neighborhoods.
  static Design independent_set_ate(const InterferenceGraph& g, std::vector<int> set,
                                    int selected);
  static Design independent_set_tte(const InterferenceGraph& g, std::vector<int> set,
                                    int selected);

  DesignKind kind() const { return kind_; }
  int num_units() const { return n_; }
  double prob_treated() const { return p_; }
  int n_treated() const { return n_treated_; }
  int clusters_treated() const { return clusters_treated_; }
  int selected() const { return selected_; }
  const ClusterPartition& partition() const { return partition_; }
  const std::vector<int>& independent_set() const { return set_; }

  double pmf(const Assignment& z) const;
  Assignment sample(Prng& rng) const;

  unsigned long long support_size() const;
  // Visits every support point exactly once in a fixed deterministic order.
  // Throws EnumerationBudgetError when the support exceeds the budget.
  void for_each_support(const std::function<void(const Assignment&, double)>& fn) const;
  SupportList support() const;

  std::string describe() const;

 private:
  Design() = default;
  void check_budget() const;

  DesignKind kind_ = DesignKind::Bernoulli;
  int n_ = 0;
  double p_ = 0.0;
  int n_treated_ = 0;
  int clusters_treated_ = 0;
  int selected_ = 0;
  ClusterPartition partition_;
  std::vector<int> set_;                         // sorted independent set
  std::vector<std::vector<int>> footprints_;     // per set member: treated units
};

// Moments of N_tau = sum_i 1(Z_i = tau.z, E_i = tau.e) under the design.
struct ExposureCountSummary {
  TreatmentExposure tau;
  double mean = 0.0;
  double variance = 0.0;
  long long min_count = 0;
  long long max_count = 0;
  bool fixed = false;        // Var(N_tau) = 0
  bool approximate = false;  // true for Monte Carlo classification
  long long reps = 0;
};

ExposureCountSummary exposure_count_summary(const Design& d, const InterferenceGraph& g,
                                            ExposureModel m, TreatmentExposure tau);
ExposureCountSummary exposure_count_summary_mc(const Design& d,
                                               const InterferenceGraph& g,
                                               ExposureModel m, TreatmentExposure tau,
                                               long long reps, std::uint64_t seed);

// Estimand-level verdict: "Fixed" when both counts are degenerate, "Random"
// when both vary, "Mixed" otherwise.
struct DesignClassification {
  ExposureCountSummary tau1;
  ExposureCountSummary tau0;
  std::string verdict;
};

DesignClassification classify_design(const Design& d, const InterferenceGraph& g,
                                     ExposureModel m, TreatmentExposure tau1,
                                     TreatmentExposure tau0);
DesignClassification classify_design_mc(const Design& d, const InterferenceGraph& g,
                                        ExposureModel m, TreatmentExposure tau1,
                                        TreatmentExposure tau0, long long reps,
                                        std::uint64_t seed);

}  // namespace htlab
