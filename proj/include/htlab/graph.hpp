#pragma once

#include <string>
#include <vector>

namespace htlab {

/// Fixed interference neighborhoods N_i over n units. Neighborhoods may be
/// asymmetric (directed interference); operations that need an undirected
/// view symmetrize first. Immutable after construction.
class InterferenceGraph {
 public:
  InterferenceGraph(int n, std::vector<std::vector<int>> neighborhoods);

  int num_units() const { return n_; }
  int degree(int unit) const { return static_cast<int>(nbrs_[unit].size()); }
  const std::vector<int>& neighbors(int unit) const { return nbrs_[unit]; }

  bool is_symmetric() const { return symmetric_; }
  InterferenceGraph symmetrized() const;

 private:
  int n_;
  std::vector<std::vector<int>> nbrs_;  // sorted per unit
  bool symmetric_;
};

InterferenceGraph build_graph(int n, std::vector<std::vector<int>> neighborhoods);

// Maximal independent set of the symmetrized graph: repeatedly take the
// minimum-degree unit of the residual graph, ties broken by lowest index.
// Deterministic, so designs built on it are reproducible.
std::vector<int> greedy_independent_set(const InterferenceGraph& g);

struct ClusterPartition {
  int num_clusters = 0;
  std::vector<int> assignment;  // per-unit cluster index
  std::vector<int> sizes;       // all > 0
};

ClusterPartition make_cluster_partition(int num_clusters, std::vector<int> assignment);

// File formats: JSON. Graph: {"n": ..., "neighborhoods": [[...], ...]}.
// Cluster: {"K": ..., "cluster": [...]}.
InterferenceGraph load_graph(const std::string& path);
void save_graph(const InterferenceGraph& g, const std::string& path);
ClusterPartition load_clusters(const std::string& path, int expected_units);

// Convenience builders used throughout the test suites.
InterferenceGraph path_graph(int n);
InterferenceGraph star_graph(int n);
InterferenceGraph cycle_graph(int n);
InterferenceGraph complete_graph(int n);
InterferenceGraph edgeless_graph(int n);

}  // namespace htlab
