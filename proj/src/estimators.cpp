#include "htlab/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "htlab/errors.hpp"
#include "htlab/numeric.hpp"

namespace htlab {

RestrictedWeights::RestrictedWeights(int n, const std::vector<int>& levels,
                                     std::string label)
    : n_(n), levels_(levels), label_(std::move(label)) {
  w_.resize(n_);
  defined_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    w_[i].assign(2 * levels_[i], 0.0);
    defined_[i].assign(2 * levels_[i], 0);
  }
}

void RestrictedWeights::set_weight(int unit, TreatmentExposure tau, double w) {
  w_[unit][tau.z * levels_[unit] + tau.e] = w;
  defined_[unit][tau.z * levels_[unit] + tau.e] = 1;
}

bool RestrictedWeights::defined(int unit, TreatmentExposure tau) const {
  if (tau.z < 0 || tau.z > 1 || tau.e < 0 || tau.e >= levels_[unit]) return false;
  return defined_[unit][tau.z * levels_[unit] + tau.e] != 0;
}

double RestrictedWeights::weight(int unit, TreatmentExposure tau) const {
  if (!defined(unit, tau)) {
    throw ValidationError("weights undefined for unit " + std::to_string(unit) +
                          " at " + to_string(tau));
  }
  return w_[unit][tau.z * levels_[unit] + tau.e];
}

double RestrictedWeights::evaluate(const ObservedData& obs) const {
  double sum = 0.0;
  for (int i = 0; i < n_; ++i) {
    const TreatmentExposure tau{obs.z[i] ? 1 : 0, obs.exposure[i]};
    sum += weight(i, tau) * obs.outcome[i];
  }
  return sum;
}

namespace {

RestrictedWeights build_ht(const PropensityTable& table, const Estimand& est,
                           bool strict) {
  const int n = table.n;
  if (strict) {
    const auto violations = positivity_violations(table, est.tau1, est.tau0);
    if (!violations.empty()) {
      const auto& v = violations.front();
      throw PositivityError(
          "ht_weights: unbiasedness requires 0 < pi < 1, but unit " +
          std::to_string(v.unit) + " has pi" + to_string(v.tau) + " = " +
          format_double(v.pi) + (violations.size() > 1
                                     ? " (and " + std::to_string(violations.size() - 1) +
                                           " more violations)"
                                     : ""));
    }
  }
  RestrictedWeights rw(n, table.levels, strict ? "ht" : "ht_on_support");
  for (int i = 0; i < n; ++i) {
    for (int z = 0; z <= 1; ++z) {
      for (int e = 0; e < table.levels[i]; ++e) {
        const TreatmentExposure tau{z, e};
        const double pi = table.value(i, tau);
        if (!strict && pi <= 0.0) continue;  // never realized; leave undefined
        double w = 0.0;
        if (tau == est.tau1) {
          w = 1.0 / (n * pi);
        } else if (tau == est.tau0) {
          w = -1.0 / (n * pi);
        }
        rw.set_weight(i, tau, w);
      }
    }
  }
  return rw;
}

}  // namespace

RestrictedWeights ht_weights(const PropensityTable& table, const Estimand& est) {
  return build_ht(table, est, true);
}

RestrictedWeights ht_weights_on_support(const PropensityTable& table,
                                        const Estimand& est) {
  return build_ht(table, est, false);
}

GeneralWeights::GeneralWeights(SupportList support, std::vector<double> flat,
                               std::string label)
    : support_(std::move(support)), w_(std::move(flat)), label_(std::move(label)) {
  if (support_.size() == 0 || w_.size() % support_.size() != 0) {
    throw ValidationError("general weights: flat size does not match support");
  }
  n_ = static_cast<int>(w_.size() / support_.size());
}

double GeneralWeights::weight(int unit, std::size_t point) const {
  return w_[unit * support_.size() + point];
}

double GeneralWeights::evaluate(const ObservedData& obs) const {
  const std::size_t idx = support_.index_of(obs.z);
  if (idx == SupportList::npos) {
    throw ValidationError(
        "general weights: realized assignment lies outside the enumerated support");
  }
  double sum = 0.0;
  for (int i = 0; i < n_; ++i) sum += weight(i, idx) * obs.outcome[i];
  return sum;
}

std::vector<double> expand_to_general(const RestrictedWeights& rw,
                                      const SupportList& support,
                                      const InterferenceGraph& g, ExposureModel m) {
  const int n = rw.num_units();
  const std::size_t s = support.size();
  std::vector<double> flat(static_cast<std::size_t>(n) * s, 0.0);
  for (std::size_t k = 0; k < s; ++k) {
    const Assignment& z = support.points[k];
    for (int i = 0; i < n; ++i) {
      const TreatmentExposure tau{z[i] ? 1 : 0, exposure_level(m, g, z, i)};
      flat[i * s + k] = rw.weight(i, tau);
    }
  }
  return flat;
}

namespace {

class ScaledEstimator final : public Estimator {
 public:
  ScaledEstimator(std::shared_ptr<const Estimator> base, double factor)
      : base_(std::move(base)), factor_(factor) {}
  double evaluate(const ObservedData& obs) const override {
    return factor_ == 0.0 ? 0.0 : factor_ * base_->evaluate(obs);
  }
  std::string name() const override {
    return "scaled(" + format_double(factor_) + ")*" + base_->name();
  }

 private:
  std::shared_ptr<const Estimator> base_;
  double factor_;
};

class ZeroEstimator final : public Estimator {
 public:
  double evaluate(const ObservedData&) const override { return 0.0; }
  std::string name() const override { return "zero"; }
};

}  // namespace

std::shared_ptr<const Estimator> shrink(std::shared_ptr<const Estimator> base,
                                        double k) {
  if (!(k > 0.0 && k <= 1.0)) {
    throw ValidationError("shrink: k must lie in (0, 1], got " + format_double(k));
  }
  if (k == 1.0) return std::make_shared<ZeroEstimator>();
  return std::make_shared<ScaledEstimator>(std::move(base), 1.0 - k);
}

std::shared_ptr<const Estimator> constant_zero_estimator() {
  return std::make_shared<ZeroEstimator>();
}

UnbiasednessSystem unbiasedness_system(const Design& d, const InterferenceGraph& g,
                                       ExposureModel m, const Estimand& est) {
  UnbiasednessSystem sys;
  sys.n = d.num_units();
  sys.support = d.support();
  sys.estimand = est;
  const std::size_t s = sys.support.size();
  const int n = sys.n;

  // Realized combination of every unit at every support point.
  std::vector<std::vector<TreatmentExposure>> realized(s,
                                                       std::vector<TreatmentExposure>(n));
  std::vector<std::vector<std::vector<std::size_t>>> omega(n);  // unit -> combo -> points
  std::vector<std::vector<TreatmentExposure>> combos(n);
  for (int i = 0; i < n; ++i) {
    const int k = num_levels(m, g, i);
    combos[i].reserve(2 * k);
    for (int z = 0; z <= 1; ++z) {
      for (int e = 0; e < k; ++e) combos[i].push_back({z, e});
    }
    omega[i].assign(2 * k, {});
  }
  for (std::size_t p = 0; p < s; ++p) {
    const Assignment& z = sys.support.points[p];
    for (int i = 0; i < n; ++i) {
      const int e = exposure_level(m, g, z, i);
      const int zi = z[i] ? 1 : 0;
      realized[p][i] = {zi, e};
      omega[i][zi * num_levels(m, g, i) + e].push_back(p);
    }
  }

  sys.tau1_attainable.assign(n, 0);
  sys.tau0_attainable.assign(n, 0);
  std::size_t row_count = 0;
  for (int i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < combos[i].size(); ++c) {
      if (!omega[i][c].empty()) ++row_count;
    }
  }
  sys.matrix = Matrix(row_count, static_cast<std::size_t>(n) * s);
  sys.rhs.assign(row_count, 0.0);
  std::size_t r = 0;
  for (int i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < combos[i].size(); ++c) {
      if (omega[i][c].empty()) continue;
      const TreatmentExposure combo = combos[i][c];
      for (std::size_t p : omega[i][c]) {
        sys.matrix.at(r, static_cast<std::size_t>(i) * s + p) = sys.support.probs[p];
      }
      if (combo == est.tau1) {
        sys.rhs[r] = 1.0 / n;
        sys.tau1_attainable[i] = 1;
      } else if (combo == est.tau0) {
        sys.rhs[r] = -1.0 / n;
        sys.tau0_attainable[i] = 1;
      }
      sys.rows.push_back({i, combo});
      ++r;
    }
  }
  return sys;
}

double system_residual(const UnbiasednessSystem& sys, const std::vector<double>& w) {
  double worst = 0.0;
  for (std::size_t r = 0; r < sys.matrix.rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < sys.matrix.cols; ++c) {
      const double a = sys.matrix.at(r, c);
      if (a != 0.0) acc += a * w[c];
    }
    worst = std::max(worst, std::abs(acc - sys.rhs[r]));
  }
  return worst;
}

UnbiasedFamily unbiased_family(const UnbiasednessSystem& sys) {
  UnbiasedFamily fam;
  for (int i = 0; i < sys.n; ++i) {
    if (!sys.tau1_attainable[i]) {
      fam.feasible = false;
      fam.infeasible_reason = "unit " + std::to_string(i) + " has pi" +
                              to_string(sys.estimand.tau1) +
                              " = 0; no weights can recover that contribution";
      return fam;
    }
  }
  for (int i = 0; i < sys.n; ++i) {
    if (!sys.tau0_attainable[i]) fam.tau0_unattainable_units.push_back(i);
  }
  LinearSolveResult sol = solve_dense(sys.matrix, sys.rhs);
  if (!sol.consistent) {
    fam.feasible = false;
    fam.infeasible_reason = "system is inconsistent at the working tolerance";
    return fam;
  }
  fam.feasible = true;
  fam.particular = std::move(sol.particular);
  fam.null_basis = std::move(sol.null_basis);
  fam.null_dim = fam.null_basis.size();
  fam.rank = sol.rank;
  return fam;
}

}  // namespace htlab
