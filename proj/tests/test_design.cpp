#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "htlab/design.hpp"
#include "htlab/errors.hpp"

using namespace htlab;

TEST_CASE("pmf examples") {
  const Design bern = Design::bernoulli(3, 0.5);
  CHECK(bern.pmf({0, 1, 0}) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(bern.pmf({1, 1, 1}) == doctest::Approx(0.125).epsilon(1e-15));

  const Design crd = Design::completely_randomized(4, 2);
  CHECK(crd.pmf({1, 1, 0, 0}) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(crd.pmf({1, 1, 1, 0}) == 0.0);
}

TEST_CASE("design parameter validation") {
  CHECK_THROWS_AS(Design::bernoulli(3, 1.5), ValidationError);
  CHECK_THROWS_AS(Design::completely_randomized(3, 4), ValidationError);
  const ClusterPartition part = make_cluster_partition(2, {0, 0, 1, 1});
  CHECK_THROWS_AS(Design::cluster_randomized(part, 3), ValidationError);
  const InterferenceGraph g = path_graph(3);
  CHECK_THROWS_WITH_AS(Design::independent_set_ate(g, {0, 2}, 3),
                       doctest::Contains("exceeds"), ValidationError);
  CHECK_THROWS_WITH_AS(Design::independent_set_ate(g, {0, 1}, 1),
                       doctest::Contains("adjacent"), ValidationError);
}

TEST_CASE("support enumeration") {
  const Design bern = Design::bernoulli(3, 0.5);
  CHECK(bern.support_size() == 8);
  CHECK(bern.support().size() == 8);

  const Design crd = Design::completely_randomized(4, 2);
  const SupportList crd_support = crd.support();
  CHECK(crd_support.size() == 6);
  for (double p : crd_support.probs) CHECK(p == doctest::Approx(1.0 / 6.0));

  const InterferenceGraph g = path_graph(3);
  const Design tte = Design::independent_set_tte(g, {0, 2}, 1);
  const SupportList tte_support = tte.support();
  CHECK(tte_support.size() == 2);
  for (double p : tte_support.probs) CHECK(p == doctest::Approx(0.5));
  // Choice {0} treats {0,1}; choice {2} treats {1,2}.
  CHECK(tte_support.index_of({1, 1, 0}) != SupportList::npos);
  CHECK(tte_support.index_of({0, 1, 1}) != SupportList::npos);
  CHECK(tte_support.index_of({1, 0, 1}) == SupportList::npos);
}

TEST_CASE("pmf sums to one over the support") {
  const InterferenceGraph g = path_graph(4);
  const ClusterPartition part = make_cluster_partition(2, {0, 0, 1, 1});
  const std::vector<Design> designs = {
      Design::bernoulli(4, 0.3),
      Design::bernoulli(4, 0.0),
      Design::completely_randomized(4, 2),
      Design::cluster_randomized(part, 1),
      Design::independent_set_ate(g, greedy_independent_set(g), 1),
      Design::independent_set_tte(g, greedy_independent_set(g), 2),
  };
  for (const Design& d : designs) {
    double total = 0.0;
    double pmf_total = 0.0;
    d.for_each_support([&](const Assignment& z, double prob) {
      total += prob;
      pmf_total += d.pmf(z);
      CHECK(d.pmf(z) == doctest::Approx(prob).epsilon(1e-13));
    });
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(std::abs(pmf_total - 1.0) <= 1e-12);
  }
}

TEST_CASE("sampling matches the design") {
  Prng rng(123);
  const Design crd = Design::completely_randomized(5, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const Assignment z = crd.sample(rng);
    int treated = 0;
    for (auto v : z) treated += v;
    CHECK(treated == 2);
  }
  Prng rng0(5);
  CHECK(Design::bernoulli(4, 0.0).sample(rng0) == Assignment{0, 0, 0, 0});
  CHECK(Design::bernoulli(4, 1.0).sample(rng0) == Assignment{1, 1, 1, 1});

  // Identical seeds give identical draws.
  Prng a(99), b(99);
  const Design bern = Design::bernoulli(6, 0.4);
  for (int trial = 0; trial < 50; ++trial) CHECK(bern.sample(a) == bern.sample(b));
}

TEST_CASE("cluster sampling treats whole clusters") {
  const ClusterPartition part = make_cluster_partition(3, {0, 0, 1, 1, 2, 2});
  const Design d = Design::cluster_randomized(part, 1);
  Prng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Assignment z = d.sample(rng);
    for (int c = 0; c < 3; ++c) {
      CHECK(z[2 * c] == z[2 * c + 1]);
    }
    int treated_clusters = (z[0] ? 1 : 0) + (z[2] ? 1 : 0) + (z[4] ? 1 : 0);
    CHECK(treated_clusters == 1);
  }
}

TEST_CASE("empirical frequencies track the pmf (chi-square sanity)") {
  const Design d = Design::completely_randomized(5, 2);
  const SupportList support = d.support();
  const long long reps = 100000;
  Prng rng(2024);
  std::vector<long long> hits(support.size(), 0);
  for (long long r = 0; r < reps; ++r) {
    const std::size_t idx = support.index_of(d.sample(rng));
    REQUIRE(idx != SupportList::npos);
    ++hits[idx];
  }
  double stat = 0.0;
  for (std::size_t s = 0; s < support.size(); ++s) {
    const double expected = support.probs[s] * static_cast<double>(reps);
    stat += (hits[s] - expected) * (hits[s] - expected) / expected;
  }
  // Wilson-Hilferty bound for chi-square df=9 far in the tail (~1e-8).
  const double df = static_cast<double>(support.size() - 1);
  const double z = 5.6;
  const double cut = df * std::pow(1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df)), 3.0);
  CHECK(stat < cut);
}

TEST_CASE("enumeration budget is enforced with the size in the message") {
  const Design big = Design::bernoulli(30, 0.5);
  CHECK_THROWS_WITH_AS(big.for_each_support([](const Assignment&, double) {}),
                       doctest::Contains("1073741824"), EnumerationBudgetError);
  try {
    big.support();
    FAIL("expected EnumerationBudgetError");
  } catch (const EnumerationBudgetError& e) {
    CHECK(e.support_size == (1ULL << 30));
  }
}

TEST_CASE("exposure count summaries") {
  const InterferenceGraph edge = path_graph(2);
  const Design bern = Design::bernoulli(2, 0.5);
  const ExposureCountSummary random_case = exposure_count_summary(
      bern, edge, ExposureModel::BinaryAnyTreated, TreatmentExposure{1, 1});
  // Enumerating the 4 assignments: only z = (1,1) has any unit at (1,1), with
  // both units there, so N takes value 2 with probability 1/4.
  CHECK(random_case.mean == 0.5);
  CHECK(random_case.variance == 0.75);
  CHECK_FALSE(random_case.fixed);
  CHECK_FALSE(random_case.approximate);

  const InterferenceGraph path3 = path_graph(3);
  const Design ate = Design::independent_set_ate(path3, {0, 2}, 1);
  const ExposureCountSummary fixed_case = exposure_count_summary(
      ate, path3, ExposureModel::BinaryAnyTreated, TreatmentExposure{1, 0});
  CHECK(fixed_case.variance == 0.0);
  CHECK(fixed_case.fixed);
  CHECK(fixed_case.mean == 1.0);

  // Single-support-point design: every count is constant.
  const Design degenerate = Design::bernoulli(3, 1.0);
  const ExposureCountSummary single = exposure_count_summary(
      degenerate, path3, ExposureModel::BinaryAnyTreated, TreatmentExposure{1, 1});
  CHECK(single.variance == 0.0);
  CHECK(single.fixed);
}

TEST_CASE("monte carlo classification is flagged approximate") {
  const InterferenceGraph path3 = path_graph(3);
  const Design ate = Design::independent_set_ate(path3, {0, 2}, 1);
  const ExposureCountSummary mc = exposure_count_summary_mc(
      ate, path3, ExposureModel::BinaryAnyTreated, TreatmentExposure{1, 0}, 2000, 9);
  CHECK(mc.approximate);
  CHECK(mc.fixed);
  CHECK(mc.variance < 1e-12);

  const ExposureCountSummary mc2 = exposure_count_summary_mc(
      ate, path3, ExposureModel::BinaryAnyTreated, TreatmentExposure{1, 0}, 2000, 9);
  CHECK(mc.mean == mc2.mean);  // seed determinism
}

TEST_CASE("estimand-level classification verdicts") {
  const InterferenceGraph path3 = path_graph(3);
  const Design ate = Design::independent_set_ate(path3, {0, 2}, 1);
  const DesignClassification fixed = classify_design(
      ate, path3, ExposureModel::BinaryAnyTreated, {1, 0}, {0, 0});
  CHECK(fixed.verdict == "Fixed");

  const InterferenceGraph path4 = path_graph(4);
  const Design crd = Design::completely_randomized(4, 2);
  const DesignClassification random_verdict = classify_design(
      crd, path4, ExposureModel::BinaryAnyTreated, {1, 1}, {0, 0});
  CHECK(random_verdict.verdict == "Random");

  // CRD with one control on the path: N_(0,0) is identically zero while
  // N_(1,1) varies, which is neither definition.
  const Design crd3 = Design::completely_randomized(4, 3);
  const DesignClassification mixed = classify_design(
      crd3, path4, ExposureModel::BinaryAnyTreated, {1, 1}, {0, 0});
  CHECK(mixed.verdict == "Mixed");
  CHECK(mixed.tau0.fixed);
  CHECK_FALSE(mixed.tau1.fixed);
}
