#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "htlab/errors.hpp"
#include "htlab/graph.hpp"
#include "htlab/prng.hpp"

using namespace htlab;

namespace {

// Brute-force maximum independent sets over all vertex subsets, used as the
// oracle for the greedy result on small graphs.
std::vector<std::set<int>> max_independent_sets(const InterferenceGraph& g) {
  const InterferenceGraph sym = g.symmetrized();
  const int n = sym.num_units();
  std::vector<std::set<int>> best;
  std::size_t best_size = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::set<int> s;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.insert(i);
    }
    bool independent = true;
    for (int i : s) {
      for (int j : sym.neighbors(i)) {
        if (s.count(j)) independent = false;
      }
    }
    if (!independent) continue;
    if (s.size() > best_size) {
      best_size = s.size();
      best.clear();
    }
    if (s.size() == best_size) best.push_back(s);
  }
  return best;
}

InterferenceGraph random_graph(int n, double edge_prob, Prng& rng) {
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform01() < edge_prob) {
        nbrs[i].push_back(j);
        nbrs[j].push_back(i);
      }
    }
  }
  return InterferenceGraph(n, std::move(nbrs));
}

}  // namespace

TEST_CASE("graph construction") {
  const InterferenceGraph g = build_graph(3, {{1}, {0, 2}, {1}});
  CHECK(g.num_units() == 3);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(1) == 2);
  CHECK(g.degree(2) == 1);
  CHECK(g.is_symmetric());

  CHECK_THROWS_WITH_AS(build_graph(3, {{0}, {0, 2}, {1}}),
                       doctest::Contains("self-loop"), ValidationError);
  CHECK_THROWS_WITH_AS(build_graph(3, {{5}, {}, {}}), doctest::Contains("out of range"),
                       ValidationError);
  CHECK_THROWS_AS(build_graph(3, {{1, 1}, {}, {}}), ValidationError);
  CHECK_THROWS_AS(build_graph(2, {{1}}), ValidationError);

  const InterferenceGraph isolated = edgeless_graph(3);
  for (int i = 0; i < 3; ++i) CHECK(isolated.degree(i) == 0);
}

TEST_CASE("asymmetric neighborhoods are allowed and flagged") {
  const InterferenceGraph g = build_graph(3, {{1}, {}, {1}});
  CHECK_FALSE(g.is_symmetric());
  const InterferenceGraph sym = g.symmetrized();
  CHECK(sym.is_symmetric());
  CHECK(sym.degree(1) == 2);
  // Symmetrization is idempotent.
  const InterferenceGraph sym2 = sym.symmetrized();
  for (int i = 0; i < 3; ++i) CHECK(sym2.neighbors(i) == sym.neighbors(i));
}

TEST_CASE("greedy independent set on the path graph") {
  const InterferenceGraph g = path_graph(3);
  const std::vector<int> s = greedy_independent_set(g);
  CHECK(s == std::vector<int>{0, 2});
  // Oracle: {0, 2} is the unique maximum independent set of the 3-path.
  const auto best = max_independent_sets(g);
  REQUIRE(best.size() == 1);
  CHECK(best[0] == std::set<int>{0, 2});
}

TEST_CASE("greedy independent set corner cases") {
  CHECK(greedy_independent_set(complete_graph(3)) == std::vector<int>{0});
  CHECK(greedy_independent_set(edgeless_graph(4)) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("independence and maximality on random graphs") {
  Prng rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_below(9));
    const InterferenceGraph g = random_graph(n, 0.35, rng);
    const InterferenceGraph sym = g.symmetrized();
    const std::vector<int> s = greedy_independent_set(g);
    const std::set<int> in_set(s.begin(), s.end());
    for (int i : s) {
      for (int j : sym.neighbors(i)) CHECK_FALSE(in_set.count(j));
    }
    for (int u = 0; u < n; ++u) {
      if (in_set.count(u)) continue;
      bool has_neighbor_in_set = false;
      for (int j : sym.neighbors(u)) {
        if (in_set.count(j)) has_neighbor_in_set = true;
      }
      CHECK(has_neighbor_in_set);
    }
  }
}

TEST_CASE("cluster partition validation") {
  const ClusterPartition p = make_cluster_partition(2, {0, 0, 1, 1});
  CHECK(p.sizes == std::vector<int>{2, 2});
  CHECK_THROWS_WITH_AS(make_cluster_partition(3, {0, 0, 1, 1}),
                       doctest::Contains("empty"), ValidationError);
  CHECK_THROWS_AS(make_cluster_partition(2, {0, 2}), ValidationError);
}

TEST_CASE("graph file round trip") {
  const InterferenceGraph g = build_graph(3, {{1}, {}, {1}});
  const std::string path = "test_graph_roundtrip.json";
  save_graph(g, path);
  const InterferenceGraph loaded = load_graph(path);
  CHECK(loaded.num_units() == 3);
  CHECK_FALSE(loaded.is_symmetric());
  for (int i = 0; i < 3; ++i) CHECK(loaded.neighbors(i) == g.neighbors(i));
  CHECK_THROWS_AS(load_graph("does_not_exist.json"), ConfigError);
}
