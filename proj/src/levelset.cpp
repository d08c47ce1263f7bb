#include "densitree/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "densitree/error.hpp"

namespace densitree {

int ClusterTree::leaf_of(int label) const {
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].label == label) return static_cast<int>(k);
  }
  throw InputError("no leaf with label " + std::to_string(label));
}

std::size_t CoreAssignment::unallocated() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0));
}

std::vector<std::size_t> level_set(std::span<const double> densities, double c) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    if (densities[i] >= c) out.push_back(i);
  }
  return out;
}

std::vector<double> probability_grid(int n_grid) {
  if (n_grid < 2) throw InputError("n_grid must be at least 2");
  std::vector<double> p(static_cast<std::size_t>(n_grid));
  for (int k = 1; k <= n_grid; ++k) p[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) / (n_grid + 1.0);
  return p;
}

namespace {

struct Group {
  std::vector<std::size_t> core;
  std::size_t founder = 0;
  bool open = true;
  bool leaf = true;
};

}  // namespace

ScanResult scan(const ConnectionGraph& graph, std::span<const double> densities, int n_grid) {
  const std::size_t n = densities.size();
  if (graph.n() != n) throw InputError("graph and density sizes differ");
  if (n == 0) throw InputError("scan needs at least one observation");
  for (double f : densities) {
    if (!std::isfinite(f) || f < 0.0) throw InputError("densities must be finite and non-negative");
  }
  ScanResult res;
  res.mode.p = probability_grid(n_grid);

  std::vector<double> sorted(densities.begin(), densities.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  std::vector<Group> groups;          // parallel to tree nodes
  std::vector<TreeNode>& nodes = res.tree.nodes;
  std::vector<int> node_of(n, -1);

  const auto nn = static_cast<std::uint64_t>(n);
  const auto g1 = static_cast<std::uint64_t>(n_grid) + 1;
  for (int k = 1; k <= n_grid; ++k) {
    const double p = res.mode.p[static_cast<std::size_t>(k - 1)];
    // ceil(k n / (n_grid + 1)) in integers
    const std::uint64_t m = (static_cast<std::uint64_t>(k) * nn + g1 - 1) / g1;
    const double c = sorted[static_cast<std::size_t>(m - 1)];
    std::vector<bool> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = densities[i] >= c;
    const Components comp = connected_components(graph, active);
    res.mode.m.push_back(comp.count);

    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(comp.count));
    for (std::size_t i = 0; i < n; ++i) {
      if (comp.label[i] >= 0) members[static_cast<std::size_t>(comp.label[i])].push_back(i);
    }
    std::vector<int> next = node_of;
    for (const auto& pts : members) {
      std::vector<int> prev;
      for (std::size_t i : pts) {
        if (node_of[i] >= 0) prev.push_back(node_of[i]);
      }
      std::sort(prev.begin(), prev.end());
      prev.erase(std::unique(prev.begin(), prev.end()), prev.end());
      int id;
      if (prev.empty()) {
        id = static_cast<int>(nodes.size());
        nodes.push_back({p, {}, 0, 0});
        groups.push_back({pts, pts.front(), true, true});
      } else if (prev.size() == 1) {
        id = prev.front();
        Group& g = groups[static_cast<std::size_t>(id)];
        if (g.leaf && g.open) {
          // pts is a superset of the current core by nestedness
          g.core = pts;
        }
      } else {
        id = static_cast<int>(nodes.size());
        nodes.push_back({p, prev, 0, 0});
        groups.push_back({{}, pts.front(), true, false});
        for (int child : prev) groups[static_cast<std::size_t>(child)].open = false;
      }
      for (std::size_t i : pts) next[i] = id;
    }
    node_of = std::move(next);
  }

  // Join whatever is still separate at the top of the scan.
  std::vector<int> tops;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].open) tops.push_back(static_cast<int>(k));
  }
  nodes.push_back({1.0, tops, 0, 0});

  std::vector<int> leaves;
  std::vector<double> peak(groups.size(), 0.0);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (!groups[k].leaf) continue;
    leaves.push_back(static_cast<int>(k));
    for (std::size_t i : groups[k].core) peak[k] = std::max(peak[k], densities[i]);
  }
  std::stable_sort(leaves.begin(), leaves.end(), [&](int a, int b) {
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);
    if (peak[ua] != peak[ub]) return peak[ua] > peak[ub];
    return groups[ua].founder < groups[ub].founder;
  });

  res.cores.labels.assign(n, 0);
  res.cores.M = static_cast<int>(leaves.size());
  for (std::size_t r = 0; r < leaves.size(); ++r) {
    const auto k = static_cast<std::size_t>(leaves[r]);
    nodes[k].label = static_cast<int>(r) + 1;
    nodes[k].core_size = groups[k].core.size();
    for (std::size_t i : groups[k].core) {
      if (res.cores.labels[i] != 0) throw InvariantError("point assigned to two cluster cores");
      res.cores.labels[i] = static_cast<int>(r) + 1;
    }
  }
  return res;
}

ModeChanges mode_changes(const ModeFunction& mf) {
  ModeChanges out;
  int prev = 0;
  auto step = [&](int cur) {
    if (cur > prev) out.increments += cur - prev;
    if (cur < prev) out.decrements += prev - cur;
    prev = cur;
  };
  for (int v : mf.m) step(v);
  step(0);
  return out;
}

}  // namespace densitree
