#include "htlab/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "htlab/errors.hpp"
#include "htlab/numeric.hpp"

namespace htlab {

std::string design_kind_name(DesignKind k) {
  switch (k) {
    case DesignKind::Bernoulli: return "bernoulli";
    case DesignKind::CompletelyRandomized: return "crd";
    case DesignKind::ClusterRandomized: return "cluster";
    case DesignKind::IndependentSetAte: return "independent_set_ate";
    case DesignKind::IndependentSetTte: return "independent_set_tte";
  }
  return "unknown";
}

std::size_t SupportList::index_of(const Assignment& z) const {
  if (index_.empty() && !points.empty()) {
    index_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      index_.emplace(pack_assignment(points[i]), i);
    }
  }
  const auto it = index_.find(pack_assignment(z));
  return it == index_.end() ? npos : it->second;
}

Design Design::bernoulli(int n, double p) {
  if (n <= 0) throw ValidationError("bernoulli: need at least one unit");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("bernoulli: p must lie in [0, 1], got " + format_double(p));
  }
  Design d;
  d.kind_ = DesignKind::Bernoulli;
  d.n_ = n;
  d.p_ = p;
  return d;
}

Design Design::completely_randomized(int n, int n_treated) {
  if (n <= 0) throw ValidationError("crd: need at least one unit");
  if (n_treated < 0 || n_treated > n) {
    throw ValidationError("crd: n_t must lie in [0, n], got " +
                          std::to_string(n_treated));
  }
  Design d;
  d.kind_ = DesignKind::CompletelyRandomized;
  d.n_ = n;
  d.n_treated_ = n_treated;
  return d;
}

Design Design::cluster_randomized(ClusterPartition partition, int clusters_treated) {
  if (clusters_treated < 0 || clusters_treated > partition.num_clusters) {
    throw ValidationError("cluster: K_t must lie in [0, K], got " +
                          std::to_string(clusters_treated));
  }
  Design d;
  d.kind_ = DesignKind::ClusterRandomized;
  d.n_ = static_cast<int>(partition.assignment.size());
  d.clusters_treated_ = clusters_treated;
  d.partition_ = std::move(partition);
  return d;
}

namespace {

void validate_independent_set(const InterferenceGraph& g, const std::vector<int>& set) {
  const InterferenceGraph sym = g.symmetrized();
  for (std::size_t a = 0; a < set.size(); ++a) {
    const int u = set[a];
    if (u < 0 || u >= g.num_units()) {
      throw ValidationError("independent set: unit " + std::to_string(u) +
                            " out of range");
    }
    if (a > 0 && set[a - 1] == u) {
      throw ValidationError("independent set: duplicate unit " + std::to_string(u));
    }
    for (std::size_t b = a + 1; b < set.size(); ++b) {
      const auto& nb = sym.neighbors(u);
      if (std::binary_search(nb.begin(), nb.end(), set[b])) {
        throw ValidationError("independent set: units " + std::to_string(u) + " and " +
                              std::to_string(set[b]) + " are adjacent");
      }
    }
  }
}

}  // namespace

Design Design::independent_set_ate(const InterferenceGraph& g, std::vector<int> set,
                                   int selected) {
  std::sort(set.begin(), set.end());
  validate_independent_set(g, set);
  if (selected < 0 || selected > static_cast<int>(set.size())) {
    throw ValidationError("independent_set_ate: n_1 = " + std::to_string(selected) +
                          " exceeds independent set size " + std::to_string(set.size()));
  }
  Design d;
  d.kind_ = DesignKind::IndependentSetAte;
  d.n_ = g.num_units();
  d.selected_ = selected;
  d.footprints_.reserve(set.size());
  for (int u : set) d.footprints_.push_back({u});
  d.set_ = std::move(set);
  return d;
}

Design Design::independent_set_tte(const InterferenceGraph& g, std::vector<int> set,
                                   int selected) {
  std::sort(set.begin(), set.end());
  validate_independent_set(g, set);
  if (selected < 0 || selected > static_cast<int>(set.size())) {
    throw ValidationError("independent_set_tte: n_1 = " + std::to_string(selected) +
                          " exceeds independent set size " + std::to_string(set.size()));
  }
  Design d;
  d.kind_ = DesignKind::IndependentSetTte;
  d.n_ = g.num_units();
  d.selected_ = selected;
  d.footprints_.reserve(set.size());
  for (int u : set) {
    std::vector<int> fp = g.neighbors(u);
    fp.push_back(u);
    std::sort(fp.begin(), fp.end());
    d.footprints_.push_back(std::move(fp));
  }
  d.set_ = std::move(set);
  return d;
}

double Design::pmf(const Assignment& z) const {
  if (static_cast<int>(z.size()) != n_) {
    throw ValidationError("pmf: assignment has length " + std::to_string(z.size()) +
                          ", design has " + std::to_string(n_) + " units");
  }
  switch (kind_) {
    case DesignKind::Bernoulli: {
      double prob = 1.0;
      for (int i = 0; i < n_; ++i) prob *= z[i] ? p_ : 1.0 - p_;
      return prob;
    }
    case DesignKind::CompletelyRandomized: {
      int treated = 0;
      for (int i = 0; i < n_; ++i) treated += z[i] ? 1 : 0;
      if (treated != n_treated_) return 0.0;
      return 1.0 / binomial(n_, n_treated_);
    }
    case DesignKind::ClusterRandomized: {
      // Valid points treat exactly the units of some K_t clusters.
      std::vector<int> cluster_state(partition_.num_clusters, -1);
      for (int i = 0; i < n_; ++i) {
        const int c = partition_.assignment[i];
        const int v = z[i] ? 1 : 0;
        if (cluster_state[c] == -1) {
          cluster_state[c] = v;
        } else if (cluster_state[c] != v) {
          return 0.0;
        }
      }
      int treated_clusters = 0;
      for (int s : cluster_state) treated_clusters += s == 1 ? 1 : 0;
      if (treated_clusters != clusters_treated_) return 0.0;
      return 1.0 / binomial(partition_.num_clusters, clusters_treated_);
    }
    case DesignKind::IndependentSetAte:
    case DesignKind::IndependentSetTte: {
      // Chosen units are exactly the treated members of the independent set;
      // the induced assignment must match their footprints exactly.
      std::vector<int> chosen;
      for (std::size_t k = 0; k < set_.size(); ++k) {
        if (z[set_[k]]) chosen.push_back(static_cast<int>(k));
      }
      if (static_cast<int>(chosen.size()) != selected_) return 0.0;
      std::vector<std::uint8_t> expect(n_, 0);
      for (int k : chosen) {
        for (int u : footprints_[k]) expect[u] = 1;
      }
      for (int i = 0; i < n_; ++i) {
        if ((z[i] ? 1 : 0) != expect[i]) return 0.0;
      }
      return 1.0 / binomial(static_cast<int>(set_.size()), selected_);
    }
  }
  return 0.0;
}

namespace {

// Partial Fisher-Yates: the first `take` entries of a fresh index vector.
std::vector<int> draw_without_replacement(int n, int take, Prng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < take; ++i) {
    const int j = i + static_cast<int>(rng.uniform_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  return idx;
}

}  // namespace

Assignment Design::sample(Prng& rng) const {
  Assignment z(n_, 0);
  switch (kind_) {
    case DesignKind::Bernoulli:
      for (int i = 0; i < n_; ++i) z[i] = rng.uniform01() < p_ ? 1 : 0;
      break;
    case DesignKind::CompletelyRandomized:
      for (int u : draw_without_replacement(n_, n_treated_, rng)) z[u] = 1;
      break;
    case DesignKind::ClusterRandomized: {
      std::vector<char> treated(partition_.num_clusters, 0);
      for (int c :
           draw_without_replacement(partition_.num_clusters, clusters_treated_, rng)) {
        treated[c] = 1;
      }
      for (int i = 0; i < n_; ++i) z[i] = treated[partition_.assignment[i]] ? 1 : 0;
      break;
    }
    case DesignKind::IndependentSetAte:
    case DesignKind::IndependentSetTte:
      for (int k :
           draw_without_replacement(static_cast<int>(set_.size()), selected_, rng)) {
        for (int u : footprints_[k]) z[u] = 1;
      }
      break;
  }
  return z;
}

unsigned long long Design::support_size() const {
  switch (kind_) {
    case DesignKind::Bernoulli:
      if (p_ == 0.0 || p_ == 1.0) return 1;
      if (n_ >= 63) return ~0ULL;
      return 1ULL << n_;
    case DesignKind::CompletelyRandomized:
      return static_cast<unsigned long long>(binomial(n_, n_treated_));
    case DesignKind::ClusterRandomized:
      return static_cast<unsigned long long>(
          binomial(partition_.num_clusters, clusters_treated_));
    case DesignKind::IndependentSetAte:
    case DesignKind::IndependentSetTte:
      return static_cast<unsigned long long>(
          binomial(static_cast<int>(set_.size()), selected_));
  }
  return 0;
}

void Design::check_budget() const {
  const unsigned long long size = support_size();
  if (size > kEnumerationBudget) {
    throw EnumerationBudgetError(
        "enumeration too large: support has " + std::to_string(size) +
            " points, budget is " + std::to_string(kEnumerationBudget),
        size);
  }
}

namespace {

bool next_combination(std::vector<int>& comb, int n) {
  const int k = static_cast<int>(comb.size());
  for (int i = k - 1; i >= 0; --i) {
    if (comb[i] < n - k + i) {
      ++comb[i];
      for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

void Design::for_each_support(
    const std::function<void(const Assignment&, double)>& fn) const {
  check_budget();
  switch (kind_) {
    case DesignKind::Bernoulli: {
      if (p_ == 0.0 || p_ == 1.0) {
        fn(Assignment(n_, p_ == 1.0 ? 1 : 0), 1.0);
        return;
      }
      // Exact powers by table; |z| determines the probability.
      std::vector<double> pw_t(n_ + 1, 1.0), pw_c(n_ + 1, 1.0);
      for (int i = 1; i <= n_; ++i) {
        pw_t[i] = pw_t[i - 1] * p_;
        pw_c[i] = pw_c[i - 1] * (1.0 - p_);
      }
      Assignment z(n_, 0);
      const std::uint64_t total = 1ULL << n_;
      for (std::uint64_t mask = 0; mask < total; ++mask) {
        int treated = 0;
        for (int i = 0; i < n_; ++i) {
          z[i] = (mask >> i) & 1;
          treated += z[i];
        }
        fn(z, pw_t[treated] * pw_c[n_ - treated]);
      }
      return;
    }
    case DesignKind::CompletelyRandomized: {
      if (n_treated_ == 0) {
        fn(Assignment(n_, 0), 1.0);
        return;
      }
      const double prob = 1.0 / binomial(n_, n_treated_);
      std::vector<int> comb(n_treated_);
      std::iota(comb.begin(), comb.end(), 0);
      do {
        Assignment z(n_, 0);
        for (int u : comb) z[u] = 1;
        fn(z, prob);
      } while (next_combination(comb, n_));
      return;
    }
    case DesignKind::ClusterRandomized: {
      const int K = partition_.num_clusters;
      if (clusters_treated_ == 0) {
        fn(Assignment(n_, 0), 1.0);
        return;
      }
      const double prob = 1.0 / binomial(K, clusters_treated_);
      std::vector<int> comb(clusters_treated_);
      std::iota(comb.begin(), comb.end(), 0);
      do {
        std::vector<char> treated(K, 0);
        for (int c : comb) treated[c] = 1;
        Assignment z(n_, 0);
        for (int i = 0; i < n_; ++i) z[i] = treated[partition_.assignment[i]] ? 1 : 0;
        fn(z, prob);
      } while (next_combination(comb, K));
      return;
    }
    case DesignKind::IndependentSetAte:
    case DesignKind::IndependentSetTte: {
      const int s = static_cast<int>(set_.size());
      const double prob = 1.0 / binomial(s, selected_);
      if (selected_ == 0) {
        fn(Assignment(n_, 0), 1.0);
        return;
      }
      std::vector<int> comb(selected_);
      std::iota(comb.begin(), comb.end(), 0);
      do {
        Assignment z(n_, 0);
        for (int k : comb) {
          for (int u : footprints_[k]) z[u] = 1;
        }
        fn(z, prob);
      } while (next_combination(comb, s));
      return;
    }
  }
}

SupportList Design::support() const {
  SupportList out;
  const unsigned long long size = support_size();
  if (size <= kEnumerationBudget) {
    out.points.reserve(size);
    out.probs.reserve(size);
  }
  for_each_support([&out](const Assignment& z, double prob) {
    out.points.push_back(z);
    out.probs.push_back(prob);
  });
  return out;
}

std::string Design::describe() const {
  switch (kind_) {
    case DesignKind::Bernoulli:
      return "bernoulli(p=" + format_double(p_) + ", n=" + std::to_string(n_) + ")";
    case DesignKind::CompletelyRandomized:
      return "crd(n_t=" + std::to_string(n_treated_) + ", n=" + std::to_string(n_) + ")";
    case DesignKind::ClusterRandomized:
      return "cluster(K_t=" + std::to_string(clusters_treated_) +
             ", K=" + std::to_string(partition_.num_clusters) + ")";
    case DesignKind::IndependentSetAte:
      return "independent_set_ate(n_1=" + std::to_string(selected_) +
             ", |S|=" + std::to_string(set_.size()) + ")";
    case DesignKind::IndependentSetTte:
      return "independent_set_tte(n_1=" + std::to_string(selected_) +
             ", |S|=" + std::to_string(set_.size()) + ")";
  }
  return "unknown";
}

namespace {

long long count_at(const Assignment& z, const InterferenceGraph& g, ExposureModel m,
                   TreatmentExposure tau) {
  long long count = 0;
  for (int i = 0; i < g.num_units(); ++i) {
    if ((z[i] ? 1 : 0) == tau.z && exposure_level(m, g, z, i) == tau.e) ++count;
  }
  return count;
}

}  // namespace

ExposureCountSummary exposure_count_summary(const Design& d, const InterferenceGraph& g,
                                            ExposureModel m, TreatmentExposure tau) {
  ExposureCountSummary out;
  out.tau = tau;
  long long min_count = std::numeric_limits<long long>::max();
  long long max_count = std::numeric_limits<long long>::min();
  double mean = 0.0;
  d.for_each_support([&](const Assignment& z, double prob) {
    const long long c = count_at(z, g, m, tau);
    min_count = std::min(min_count, c);
    max_count = std::max(max_count, c);
    mean += prob * static_cast<double>(c);
  });
  out.min_count = min_count;
  out.max_count = max_count;
  // Counts are integers, so a degenerate range certifies Var = 0 exactly.
  if (min_count == max_count) {
    out.mean = static_cast<double>(min_count);
    out.variance = 0.0;
    out.fixed = true;
    return out;
  }
  out.mean = mean;
  double var = 0.0;
  d.for_each_support([&](const Assignment& z, double prob) {
    const double dev = static_cast<double>(count_at(z, g, m, tau)) - mean;
    var += prob * dev * dev;
  });
  out.variance = var;
  out.fixed = false;
  return out;
}

ExposureCountSummary exposure_count_summary_mc(const Design& d,
                                               const InterferenceGraph& g,
                                               ExposureModel m, TreatmentExposure tau,
                                               long long reps, std::uint64_t seed) {
  if (reps < 1) throw ValidationError("exposure_count_summary_mc: reps must be >= 1");
  ExposureCountSummary out;
  out.tau = tau;
  out.approximate = true;
  out.reps = reps;
  Prng rng(derive_seed(seed, 0));
  long long min_count = std::numeric_limits<long long>::max();
  long long max_count = std::numeric_limits<long long>::min();
  double sum = 0.0, sum_sq = 0.0;
  for (long long r = 0; r < reps; ++r) {
    const Assignment z = d.sample(rng);
    const long long c = count_at(z, g, m, tau);
    min_count = std::min(min_count, c);
    max_count = std::max(max_count, c);
    sum += static_cast<double>(c);
    sum_sq += static_cast<double>(c) * static_cast<double>(c);
  }
  out.min_count = min_count;
  out.max_count = max_count;
  out.mean = sum / static_cast<double>(reps);
  out.variance =
      reps > 1
          ? std::max(0.0, (sum_sq - sum * sum / static_cast<double>(reps)) /
                              static_cast<double>(reps - 1))
          : 0.0;
  out.fixed = out.variance < 1e-12;
  return out;
}

namespace {

std::string verdict_of(const ExposureCountSummary& a, const ExposureCountSummary& b) {
  if (a.fixed && b.fixed) return "Fixed";
  if (!a.fixed && !b.fixed) return "Random";
  return "Mixed";
}

}  // namespace

DesignClassification classify_design(const Design& d, const InterferenceGraph& g,
                                     ExposureModel m, TreatmentExposure tau1,
                                     TreatmentExposure tau0) {
  DesignClassification out;
  out.tau1 = exposure_count_summary(d, g, m, tau1);
  out.tau0 = exposure_count_summary(d, g, m, tau0);
  out.verdict = verdict_of(out.tau1, out.tau0);
  return out;
}

DesignClassification classify_design_mc(const Design& d, const InterferenceGraph& g,
                                        ExposureModel m, TreatmentExposure tau1,
                                        TreatmentExposure tau0, long long reps,
                                        std::uint64_t seed) {
  DesignClassification out;
  out.tau1 = exposure_count_summary_mc(d, g, m, tau1, reps, derive_seed(seed, 1));
  out.tau0 = exposure_count_summary_mc(d, g, m, tau0, reps, derive_seed(seed, 2));
  out.verdict = verdict_of(out.tau1, out.tau0);
  return out;
}

}  // namespace htlab
