#include "htlab/graph.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

#include "htlab/errors.hpp"
#include "json.hpp"

namespace htlab {

InterferenceGraph::InterferenceGraph(int n, std::vector<std::vector<int>> neighborhoods)
    : n_(n), nbrs_(std::move(neighborhoods)) {
  if (n_ < 0) throw ValidationError("graph: unit count must be non-negative");
  if (static_cast<int>(nbrs_.size()) != n_) {
    throw ValidationError("graph: expected " + std::to_string(n_) +
                          " neighborhoods, got " + std::to_string(nbrs_.size()));
  }
  for (int i = 0; i < n_; ++i) {
    auto& nb = nbrs_[i];
    std::sort(nb.begin(), nb.end());
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const int j = nb[k];
      if (j == i) {
        throw ValidationError("graph: self-loop at unit " + std::to_string(i));
      }
      if (j < 0 || j >= n_) {
        throw ValidationError("graph: neighbor index " + std::to_string(j) +
                              " of unit " + std::to_string(i) + " out of range [0, " +
                              std::to_string(n_) + ")");
      }
      if (k > 0 && nb[k - 1] == j) {
        throw ValidationError("graph: duplicate neighbor " + std::to_string(j) +
                              " at unit " + std::to_string(i));
      }
    }
  }
  symmetric_ = true;
  for (int i = 0; i < n_ && symmetric_; ++i) {
    for (int j : nbrs_[i]) {
      if (!std::binary_search(nbrs_[j].begin(), nbrs_[j].end(), i)) {
        symmetric_ = false;
        break;
      }
    }
  }
}

InterferenceGraph InterferenceGraph::symmetrized() const {
  std::vector<std::set<int>> adj(n_);
  for (int i = 0; i < n_; ++i) {
    for (int j : nbrs_[i]) {
      adj[i].insert(j);
      adj[j].insert(i);
    }
  }
  std::vector<std::vector<int>> out(n_);
  for (int i = 0; i < n_; ++i) out[i].assign(adj[i].begin(), adj[i].end());
  return InterferenceGraph(n_, std::move(out));
}

InterferenceGraph build_graph(int n, std::vector<std::vector<int>> neighborhoods) {
  return InterferenceGraph(n, std::move(neighborhoods));
}

std::vector<int> greedy_independent_set(const InterferenceGraph& g) {
  const InterferenceGraph sym = g.symmetrized();
  const int n = sym.num_units();
  std::vector<char> removed(n, 0);
  std::vector<int> residual_degree(n);
  for (int i = 0; i < n; ++i) residual_degree[i] = sym.degree(i);

  std::vector<int> chosen;
  int remaining = n;
  while (remaining > 0) {
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (removed[i]) continue;
      if (best < 0 || residual_degree[i] < residual_degree[best]) best = i;
    }
    chosen.push_back(best);
    removed[best] = 1;
    --remaining;
    for (int j : sym.neighbors(best)) {
      if (removed[j]) continue;
      removed[j] = 1;
      --remaining;
      for (int k : sym.neighbors(j)) {
        if (!removed[k]) --residual_degree[k];
      }
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

ClusterPartition make_cluster_partition(int num_clusters, std::vector<int> assignment) {
  if (num_clusters <= 0) throw ValidationError("clusters: K must be positive");
  ClusterPartition p;
  p.num_clusters = num_clusters;
  p.sizes.assign(num_clusters, 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const int c = assignment[i];
    if (c < 0 || c >= num_clusters) {
      throw ValidationError("clusters: unit " + std::to_string(i) +
                            " has cluster index " + std::to_string(c) +
                            " out of range [0, " + std::to_string(num_clusters) + ")");
    }
    ++p.sizes[c];
  }
  for (int k = 0; k < num_clusters; ++k) {
    if (p.sizes[k] == 0) {
      throw ValidationError("clusters: cluster " + std::to_string(k) + " is empty");
    }
  }
  p.assignment = std::move(assignment);
  return p;
}

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace

InterferenceGraph load_graph(const std::string& path) {
  const nlohmann::json j = read_json_file(path);
  if (!j.contains("n") || !j.contains("neighborhoods")) {
    throw ConfigError("graph file " + path + ": required fields 'n' and 'neighborhoods'");
  }
  try {
    const int n = j.at("n").get<int>();
    auto nbrs = j.at("neighborhoods").get<std::vector<std::vector<int>>>();
    return InterferenceGraph(n, std::move(nbrs));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("graph file " + path + ": " + e.what());
  }
}

void save_graph(const InterferenceGraph& g, const std::string& path) {
  nlohmann::json j;
  j["n"] = g.num_units();
  std::vector<std::vector<int>> nbrs;
  for (int i = 0; i < g.num_units(); ++i) nbrs.push_back(g.neighbors(i));
  j["neighborhoods"] = nbrs;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

ClusterPartition load_clusters(const std::string& path, int expected_units) {
  const nlohmann::json j = read_json_file(path);
  if (!j.contains("K") || !j.contains("cluster")) {
    throw ConfigError("cluster file " + path + ": required fields 'K' and 'cluster'");
  }
  try {
    const int k = j.at("K").get<int>();
    auto assignment = j.at("cluster").get<std::vector<int>>();
    if (static_cast<int>(assignment.size()) != expected_units) {
      throw ConfigError("cluster file " + path + ": expected " +
                        std::to_string(expected_units) + " entries, got " +
                        std::to_string(assignment.size()));
    }
    return make_cluster_partition(k, std::move(assignment));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cluster file " + path + ": " + e.what());
  }
}

InterferenceGraph path_graph(int n) {
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i + 1 < n; ++i) {
    nbrs[i].push_back(i + 1);
    nbrs[i + 1].push_back(i);
  }
  return InterferenceGraph(n, std::move(nbrs));
}

InterferenceGraph star_graph(int n) {
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 1; i < n; ++i) {
    nbrs[0].push_back(i);
    nbrs[i].push_back(0);
  }
  return InterferenceGraph(n, std::move(nbrs));
}

InterferenceGraph cycle_graph(int n) {
  if (n < 3) return path_graph(n);
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i < n; ++i) {
    nbrs[i].push_back((i + 1) % n);
    nbrs[i].push_back((i + n - 1) % n);
  }
  return InterferenceGraph(n, std::move(nbrs));
}

InterferenceGraph complete_graph(int n) {
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j != i) nbrs[i].push_back(j);
    }
  }
  return InterferenceGraph(n, std::move(nbrs));
}

InterferenceGraph edgeless_graph(int n) {
  return InterferenceGraph(n, std::vector<std::vector<int>>(n));
}

}  // namespace htlab
