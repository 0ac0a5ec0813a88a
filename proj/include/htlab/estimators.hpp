#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "htlab/design.hpp"
#include "htlab/linalg.hpp"
#include "htlab/outcomes.hpp"
#include "htlab/propensity.hpp"

namespace htlab {

/// A linear estimator evaluated on one realized data set.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual double evaluate(const ObservedData& obs) const = 0;
  virtual std::string name() const = 0;
};

/// Weights of the restricted class w_i(z_i, e_i). Undefined combinations
/// throw on evaluation.
class RestrictedWeights final : public Estimator {
 public:
  RestrictedWeights(int n, const std::vector<int>& levels, std::string label);

  void set_weight(int unit, TreatmentExposure tau, double w);
  bool defined(int unit, TreatmentExposure tau) const;
  double weight(int unit, TreatmentExposure tau) const;

  double evaluate(const ObservedData& obs) const override;
  std::string name() const override { return label_; }

  int num_units() const { return n_; }
  int levels(int unit) const { return levels_[unit]; }

 private:
  int n_;
  std::vector<int> levels_;
  std::vector<std::vector<double>> w_;
  std::vector<std::vector<char>> defined_;
  std::string label_;
};

// Horvitz-Thompson weights: 1/(n pi_i(tau1)) at tau1, -1/(n pi_i(tau0)) at
// tau0, 0 otherwise. Throws PositivityError unless 0 < pi < 1 at both
// combinations for every unit.
RestrictedWeights ht_weights(const PropensityTable& table, const Estimand& est);

// Same weight rule but defined only at combinations the design can produce
// (pi > 0); combinations that never occur are left undefined rather than
// rejected. This is the estimator evaluated on partially identified
// instances, where the strict constructor refuses.
RestrictedWeights ht_weights_on_support(const PropensityTable& table,
                                        const Estimand& est);

/// General weights w_i(z), indexed by the design's enumerated support.
class GeneralWeights final : public Estimator {
 public:
  GeneralWeights(SupportList support, std::vector<double> flat, std::string label);

  // Flat layout: w[unit * support_size + point].
  const std::vector<double>& flat() const { return w_; }
  const SupportList& support() const { return support_; }
  double weight(int unit, std::size_t point) const;

  double evaluate(const ObservedData& obs) const override;
  std::string name() const override { return label_; }

 private:
  SupportList support_;
  std::vector<double> w_;
  int n_;
  std::string label_;
};

// Expand restricted weights to the general per-support-point form.
std::vector<double> expand_to_general(const RestrictedWeights& rw,
                                      const SupportList& support,
                                      const InterferenceGraph& g, ExposureModel m);

// Shrink toward zero: value is (1 - k) times the base value. k in (0, 1].
std::shared_ptr<const Estimator> shrink(std::shared_ptr<const Estimator> base,
                                        double k);
std::shared_ptr<const Estimator> constant_zero_estimator();

/// The unbiasedness equations: one row per (unit, combination attained by at
/// least one support point), with coefficient pmf(z) on variable w_i(z) when
/// z realizes that combination for unit i. Right-hand side is 1/n at tau1,
/// -1/n at tau0, 0 elsewhere.
struct UnbiasednessSystem {
  struct Row {
    int unit;
    TreatmentExposure combo;
  };

  int n = 0;
  SupportList support;
  Matrix matrix;  // rows x (n * |support|)
  std::vector<double> rhs;
  std::vector<Row> rows;
  Estimand estimand;
  std::vector<char> tau1_attainable;  // per unit
  std::vector<char> tau0_attainable;
};

UnbiasednessSystem unbiasedness_system(const Design& d, const InterferenceGraph& g,
                                       ExposureModel m, const Estimand& est);

double system_residual(const UnbiasednessSystem& sys, const std::vector<double>& w);

struct UnbiasedFamily {
  bool feasible = false;
  std::string infeasible_reason;
  std::vector<double> particular;               // least-norm, flat layout
  std::vector<std::vector<double>> null_basis;  // orthonormal
  std::size_t null_dim = 0;
  std::size_t rank = 0;
  // Units whose tau0 combination the design never reveals. Solutions are
  // unbiased for contrasts of tables supported on attained combinations.
  std::vector<int> tau0_unattainable_units;
};

UnbiasedFamily unbiased_family(const UnbiasednessSystem& sys);

struct ShrinkageSearch {
  int restarts = 12;
  int iterations = 400;
  double tolerance = 1e-9;
  std::uint64_t seed = 1;
  int prepass = 2048;
  int workers = 1;
};

struct ShrinkageResult {
  bool hypothesis_fails = false;  // a zero-variance table with theta != 0 exists
  std::string witness_note;
  double k = 0.0;
  double k0 = 0.0;
  double objective = 0.0;  // best value of 2 Var / (Var + theta^2)
  bool certified = false;  // restarts agreed within tolerance
  int restarts_run = 0;
  int iterations_used = 0;
  std::vector<double> minimizer;  // table coefficients on identified coords
};

// k0 = min over outcome tables of 2 Var(ht) / (Var(ht) + theta^2), searched on
// the unit sphere of the design-identified table coordinates (the objective is
// scale-invariant). Reports "hypothesis fails" when the count covariance is
// singular with a nonzero-effect witness, i.e. a zero-variance table exists.
ShrinkageResult shrinkage_k(const Design& d, const InterferenceGraph& g,
                            ExposureModel m, const Estimand& est,
                            const ShrinkageSearch& search);

}  // namespace htlab
