#include "htlab/propensity.hpp"

#include <cmath>

#include "htlab/errors.hpp"
#include "htlab/numeric.hpp"

namespace htlab {

double PropensityTable::value(int unit, TreatmentExposure tau) const {
  if (!has_combo(unit, tau)) {
    throw ValidationError("propensity: combination " + to_string(tau) +
                          " does not exist for unit " + std::to_string(unit));
  }
  return pi[unit][tau.z * levels[unit] + tau.e];
}

double PropensityTable::stderr_of(int unit, TreatmentExposure tau) const {
  if (se.empty()) return 0.0;
  return se[unit][tau.z * levels[unit] + tau.e];
}

bool PropensityTable::has_combo(int unit, TreatmentExposure tau) const {
  return unit >= 0 && unit < n && (tau.z == 0 || tau.z == 1) && tau.e >= 0 &&
         tau.e < levels[unit];
}

double propensity_exact(const Design& d, const InterferenceGraph& g, ExposureModel m,
                        int unit, TreatmentExposure tau) {
  double total = 0.0;
  d.for_each_support([&](const Assignment& z, double prob) {
    if ((z[unit] ? 1 : 0) == tau.z && exposure_level(m, g, z, unit) == tau.e) {
      total += prob;
    }
  });
  return total;
}

namespace {

double crd_symmetric(int n, int nt, int d, TreatmentExposure tau) {
  const int nc = n - nt;
  const int e = tau.e;
  if (tau.z == 1) {
    if (nt >= e + 1 && nc >= d - e) {
      return (static_cast<double>(nt) / n) * binomial(nt - 1, e) *
             binomial(nc, d - e) / binomial(n - 1, d);
    }
    return 0.0;
  }
  if (nt >= e && nc >= d - e + 1) {
    return (static_cast<double>(nc) / n) * binomial(nt, e) * binomial(nc - 1, d - e) /
           binomial(n - 1, d);
  }
  return 0.0;
}

double bernoulli_symmetric(double p, int d, TreatmentExposure tau) {
  const int e = tau.e;
  if (e < 0 || e > d) return 0.0;
  const double own = tau.z == 1 ? p : 1.0 - p;
  return binomial(d, e) * std::pow(p, e) * std::pow(1.0 - p, d - e) * own;
}

double crd_binary(int n, int nt, int d, TreatmentExposure tau) {
  const int nc = n - nt;
  const double ft = static_cast<double>(nt) / n;
  const double fc = static_cast<double>(nc) / n;
  if (tau.z == 1) {
    if (tau.e == 0) {
      if (d == 0) return ft;
      if (d <= nc) return ft * binomial_ratio(nc, d, n - 1, d);
      return 0.0;
    }
    if (d == 0) return 0.0;
    if (d <= nc) return ft * (1.0 - binomial_ratio(nc, d, n - 1, d));
    return ft;
  }
  if (tau.e == 0) {
    if (d == 0) return fc;
    if (d <= nc - 1) return fc * binomial_ratio(nc - 1, d, n - 1, d);
    return 0.0;
  }
  if (d == 0) return 0.0;
  if (d <= nc - 1) return fc * (1.0 - binomial_ratio(nc - 1, d, n - 1, d));
  return fc;
}

double bernoulli_binary(double p, int d, TreatmentExposure tau) {
  const double any = d == 0 ? 0.0 : 1.0 - std::pow(1.0 - p, d);
  const double own = tau.z == 1 ? p : 1.0 - p;
  return own * (tau.e == 1 ? any : 1.0 - any);
}

// Cluster randomization with binary exposure. u = number of distinct clusters
// among the unit and its neighbors. The control-side formulas come from the
// hypergeometric product P(all u clusters control) = prod (K_c - j + 1)/(K - j + 1);
// the treated side assumes a treated unit always has a treated neighbor, which
// requires a same-cluster neighbor whenever d > 0.
std::optional<double> cluster_binary(const Design& des, const InterferenceGraph& g,
                                     int unit, TreatmentExposure tau) {
  const ClusterPartition& part = des.partition();
  const int K = part.num_clusters;
  const int Kt = des.clusters_treated();
  const int Kc = K - Kt;
  const int d = g.degree(unit);
  const double ft = static_cast<double>(Kt) / K;
  const double fc = static_cast<double>(Kc) / K;

  if (d == 0) {
    if (tau.z == 1) return tau.e == 0 ? ft : 0.0;
    return tau.e == 0 ? fc : 0.0;
  }

  const int own = part.assignment[unit];
  bool own_cluster_neighbor = false;
  std::vector<char> seen(K, 0);
  seen[own] = 1;
  int u = 1;
  for (int j : g.neighbors(unit)) {
    const int c = part.assignment[j];
    if (c == own) own_cluster_neighbor = true;
    if (!seen[c]) {
      seen[c] = 1;
      ++u;
    }
  }
  if (!own_cluster_neighbor) return std::nullopt;  // treated side needs it

  if (tau.z == 1) return tau.e == 1 ? ft : 0.0;

  double all_control = 1.0;
  for (int j = 1; j <= u; ++j) {
    all_control *= static_cast<double>(Kc - j + 1) / static_cast<double>(K - j + 1);
    if (all_control == 0.0) break;
  }
  all_control = std::max(0.0, all_control);
  return tau.e == 0 ? all_control : fc - all_control;
}

}  // namespace

std::optional<double> propensity_analytic(const Design& d, const InterferenceGraph& g,
                                          ExposureModel m, int unit,
                                          TreatmentExposure tau) {
  if (tau.z != 0 && tau.z != 1) return 0.0;
  if (tau.e < 0 || tau.e >= num_levels(m, g, unit)) return 0.0;
  const int deg = g.degree(unit);
  switch (d.kind()) {
    case DesignKind::CompletelyRandomized:
      return m == ExposureModel::SymmetricCount
                 ? crd_symmetric(d.num_units(), d.n_treated(), deg, tau)
                 : crd_binary(d.num_units(), d.n_treated(), deg, tau);
    case DesignKind::Bernoulli:
      return m == ExposureModel::SymmetricCount
                 ? bernoulli_symmetric(d.prob_treated(), deg, tau)
                 : bernoulli_binary(d.prob_treated(), deg, tau);
    case DesignKind::ClusterRandomized:
      if (m == ExposureModel::BinaryAnyTreated) return cluster_binary(d, g, unit, tau);
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

McEstimate propensity_mc(const Design& d, const InterferenceGraph& g, ExposureModel m,
                         int unit, TreatmentExposure tau, long long reps,
                         std::uint64_t seed) {
  if (reps < 1) throw ValidationError("propensity_mc: reps must be >= 1");
  Prng rng(derive_seed(seed, 0));
  long long hits = 0;
  for (long long r = 0; r < reps; ++r) {
    const Assignment z = d.sample(rng);
    if ((z[unit] ? 1 : 0) == tau.z && exposure_level(m, g, z, unit) == tau.e) ++hits;
  }
  McEstimate out;
  out.estimate = static_cast<double>(hits) / static_cast<double>(reps);
  out.std_error =
      std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(reps));
  return out;
}

namespace {

PropensityTable empty_table(const InterferenceGraph& g, ExposureModel m) {
  PropensityTable t;
  t.n = g.num_units();
  t.levels.resize(t.n);
  t.pi.resize(t.n);
  for (int i = 0; i < t.n; ++i) {
    t.levels[i] = num_levels(m, g, i);
    t.pi[i].assign(2 * t.levels[i], 0.0);
  }
  return t;
}

}  // namespace

PropensityTable propensity_table_exact(const Design& d, const InterferenceGraph& g,
                                       ExposureModel m) {
  PropensityTable t = empty_table(g, m);
  t.method = "exact";
  d.for_each_support([&](const Assignment& z, double prob) {
    for (int i = 0; i < t.n; ++i) {
      const int e = exposure_level(m, g, z, i);
      t.pi[i][(z[i] ? 1 : 0) * t.levels[i] + e] += prob;
    }
  });
  return t;
}

PropensityTable propensity_table_analytic(const Design& d, const InterferenceGraph& g,
                                          ExposureModel m) {
  PropensityTable t = empty_table(g, m);
  t.method = "analytic";
  t.entry_method.resize(t.n);
  bool any_fallback = false;
  for (int i = 0; i < t.n; ++i) {
    t.entry_method[i].assign(2 * t.levels[i], "analytic");
    for (int z = 0; z <= 1; ++z) {
      for (int e = 0; e < t.levels[i]; ++e) {
        const TreatmentExposure tau{z, e};
        const auto v = propensity_analytic(d, g, m, i, tau);
        if (v.has_value()) {
          t.pi[i][z * t.levels[i] + e] = *v;
        } else {
          t.pi[i][z * t.levels[i] + e] = propensity_exact(d, g, m, i, tau);
          t.entry_method[i][z * t.levels[i] + e] = "exact";
          any_fallback = true;
        }
      }
    }
  }
  if (any_fallback) t.method = "mixed";
  return t;
}

PropensityTable propensity_table_mc(const Design& d, const InterferenceGraph& g,
                                    ExposureModel m, long long reps,
                                    std::uint64_t seed) {
  if (reps < 1) throw ValidationError("propensity_table_mc: reps must be >= 1");
  PropensityTable t = empty_table(g, m);
  t.method = "montecarlo";
  t.reps = reps;
  Prng rng(derive_seed(seed, 0));
  for (long long r = 0; r < reps; ++r) {
    const Assignment z = d.sample(rng);
    for (int i = 0; i < t.n; ++i) {
      const int e = exposure_level(m, g, z, i);
      t.pi[i][(z[i] ? 1 : 0) * t.levels[i] + e] += 1.0;
    }
  }
  t.se.resize(t.n);
  for (int i = 0; i < t.n; ++i) {
    t.se[i].assign(2 * t.levels[i], 0.0);
    for (std::size_t k = 0; k < t.pi[i].size(); ++k) {
      const double freq = t.pi[i][k] / static_cast<double>(reps);
      t.pi[i][k] = freq;
      t.se[i][k] = std::sqrt(freq * (1.0 - freq) / static_cast<double>(reps));
    }
  }
  return t;
}

std::vector<PositivityViolation> positivity_violations(const PropensityTable& table,
                                                       TreatmentExposure tau1,
                                                       TreatmentExposure tau0) {
  std::vector<PositivityViolation> out;
  for (int i = 0; i < table.n; ++i) {
    for (const TreatmentExposure tau : {tau1, tau0}) {
      if (!table.has_combo(i, tau)) {
        out.push_back({i, tau, 0.0});
        continue;
      }
      const double pi = table.value(i, tau);
      if (pi <= 0.0 || pi >= 1.0) out.push_back({i, tau, pi});
    }
  }
  return out;
}

namespace {

void require_alpha_domain(const Design& d, ExposureModel m) {
  if (m != ExposureModel::SymmetricCount) {
    throw ValidationError(
        "alpha_inclusion: only the symmetric exposure model is covered");
  }
  if (d.kind() != DesignKind::CompletelyRandomized &&
      d.kind() != DesignKind::Bernoulli) {
    throw ValidationError("alpha_inclusion: uncovered design " +
                          design_kind_name(d.kind()));
  }
}

}  // namespace

double alpha_inclusion_exact(const Design& d, const InterferenceGraph& g,
                             ExposureModel m, int unit, int exposure) {
  require_alpha_domain(d, m);
  double total = 0.0;
  d.for_each_support([&](const Assignment& z, double prob) {
    int treated = 0;
    for (std::uint8_t v : z) treated += v ? 1 : 0;
    if (treated == 0) return;  // summand is 0 by convention
    if (z[unit] && exposure_level(m, g, z, unit) == exposure) {
      total += prob / static_cast<double>(treated);
    }
  });
  return total;
}

double alpha_inclusion_analytic(const Design& d, const InterferenceGraph& g,
                                ExposureModel m, int unit, int exposure) {
  require_alpha_domain(d, m);
  const int n = d.num_units();
  const int deg = g.degree(unit);
  if (d.kind() == DesignKind::CompletelyRandomized) {
    const int nt = d.n_treated();
    const int nc = n - nt;
    if (nt >= exposure + 1 && nc >= deg - exposure) {
      return (1.0 / n) * binomial(nt - 1, exposure) * binomial(nc, deg - exposure) /
             binomial(n - 1, deg);
    }
    return 0.0;
  }
  // Bernoulli: conditional on at least one treated unit, the treated count K
  // follows the normalized binomial on {1, ..., n}.
  const double p = d.prob_treated();
  if (p == 0.0) return 0.0;
  const double norm = 1.0 - std::pow(1.0 - p, n);
  double expect = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double weight = binomial(n, k) * std::pow(p, k) * std::pow(1.0 - p, n - k);
    const double term =
        binomial(k - 1, exposure) * binomial(n - k, deg - exposure) / binomial(n - 1, deg);
    expect += weight * term;
  }
  return expect / (norm * n);
}

}  // namespace htlab
