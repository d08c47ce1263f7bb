#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "densitree/graph.hpp"

namespace densitree {

struct ModeFunction {
  std::vector<double> p;
  std::vector<int> m;
};

struct TreeNode {
  double height = 0.0;
  std::vector<int> children;  // node ids; empty for leaves
  int label = 0;              // cluster label for leaves, 0 otherwise
  std::size_t core_size = 0;  // leaves only
};

/// Nodes are stored in creation order; the root is the last one.
struct ClusterTree {
  std::vector<TreeNode> nodes;
  int root() const noexcept { return static_cast<int>(nodes.size()) - 1; }
  /// Node id of the leaf carrying `label`.
  int leaf_of(int label) const;
};

/// labels[i] in 1..M, or 0 for a point outside every core.
struct CoreAssignment {
  std::vector<int> labels;
  int M = 0;
  std::size_t unallocated() const;
};

struct ScanResult {
  ModeFunction mode;
  ClusterTree tree;
  CoreAssignment cores;
};

/// Indices with density >= c, ascending.
std::vector<std::size_t> level_set(std::span<const double> densities, double c);

/// Grid p_k = k / (n_grid + 1), k = 1..n_grid.
std::vector<double> probability_grid(int n_grid);

/// Tracks components of the upper level sets along the probability grid and
/// extracts the cluster tree and the cluster cores. At each p the threshold
/// is the ceil(p n)-th largest density.
ScanResult scan(const ConnectionGraph& graph, std::span<const double> densities, int n_grid);

struct ModeChanges {
  int increments = 0;
  int decrements = 0;
};

/// Total ups and downs of (0, m(p_1), ..., m(p_K), 0).
ModeChanges mode_changes(const ModeFunction& mf);

}  // namespace densitree
