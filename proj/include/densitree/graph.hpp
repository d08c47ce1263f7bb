#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "densitree/kde.hpp"
#include "densitree/matrix.hpp"

namespace densitree {

enum class GraphType { Unidimensional, Delaunay, Pairs };

std::string_view to_string(GraphType type);
GraphType parse_graph_type(std::string_view name);

struct Edge {
  std::uint32_t i;
  std::uint32_t j;
  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge&) const = default;
};

/// Valley amplitudes for every unordered pair, stored as a dense
/// upper-triangular float32 array.
class PairAmplitudes {
 public:
  PairAmplitudes() = default;
  PairAmplitudes(std::size_t n, int grid_pairs, KernelKind kernel);

  std::size_t n() const noexcept { return n_; }
  int grid_pairs() const noexcept { return grid_pairs_; }
  KernelKind kernel() const noexcept { return kernel_; }

  static std::size_t index(std::size_t i, std::size_t j, std::size_t n) noexcept {
    // i < j
    return i * n - i * (i + 1) / 2 + (j - i - 1);
  }

  float at(std::size_t i, std::size_t j) const noexcept {
    return i < j ? values_[index(i, j, n_)] : values_[index(j, i, n_)];
  }
  void set(std::size_t i, std::size_t j, float r) noexcept { values_[index(i, j, n_)] = r; }

  const std::vector<float>& values() const noexcept { return values_; }
  std::vector<float>& values() noexcept { return values_; }

  /// 16-byte little-endian header (magic "DTPA", n, grid_pairs, kernel id)
  /// followed by the float32 upper triangle in row order.
  void save(const std::filesystem::path& path) const;
  static PairAmplitudes load(const std::filesystem::path& path);

  bool operator==(const PairAmplitudes&) const = default;

 private:
  std::size_t n_ = 0;
  int grid_pairs_ = 0;
  KernelKind kernel_ = KernelKind::Gaussian;
  std::vector<float> values_;
};

/// Undirected graph on observation indices. Immutable after construction.
class ConnectionGraph {
 public:
  ConnectionGraph(std::size_t n, std::vector<Edge> edges, GraphType type);
  /// Pairs graph: edge (i, j) iff amplitude(i, j) < lambda.
  ConnectionGraph(PairAmplitudes amplitudes, double lambda);

  std::size_t n() const noexcept { return n_; }
  GraphType type() const noexcept { return type_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const std::uint32_t> neighbors(std::size_t v) const noexcept {
    return {adj_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  bool has_amplitudes() const noexcept { return amplitudes_.has_value(); }
  const PairAmplitudes& amplitudes() const;
  std::optional<double> lambda() const noexcept { return lambda_; }

 private:
  void build_adjacency();

  std::size_t n_;
  GraphType type_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> adj_;
  std::optional<PairAmplitudes> amplitudes_;
  std::optional<double> lambda_;
};

/// Joins observations adjacent in sorted order (ties broken by index).
ConnectionGraph build_unidimensional(const Matrix& data);

/// Delaunay edges of the points (d = 2 or 3).
ConnectionGraph build_delaunay(const Matrix& data);

/// Normalized area between the water-filling envelope of a section and the
/// section itself, relative to the area under the envelope (trapezoid rule).
double valley_amplitude(std::span<const double> section);

/// Evaluates the density along every segment between observations and keeps
/// the pairs without a valley deeper than lambda. Parallel over pairs.
ConnectionGraph build_pairs(const Matrix& data, KernelKind kernel, const Bandwidth& bw,
                            int grid_pairs, double lambda);

/// New pairs graph from stored amplitudes; no density is re-evaluated.
ConnectionGraph rethreshold(const ConnectionGraph& graph, double lambda);

struct Components {
  std::vector<int> label;  // -1 for vertices outside the active set
  int count = 0;
};

/// Components of the subgraph induced by `active`. Labels are numbered in
/// order of the smallest vertex of each component.
Components connected_components(const ConnectionGraph& graph, std::span<const std::size_t> active);
Components connected_components(const ConnectionGraph& graph, const std::vector<bool>& active_mask);

}  // namespace densitree
