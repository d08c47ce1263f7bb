#include "densitree/graph.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include "densitree/delaunay.hpp"
#include "densitree/error.hpp"

namespace densitree {

std::string_view to_string(GraphType type) {
  switch (type) {
    case GraphType::Unidimensional: return "unidimensional";
    case GraphType::Delaunay: return "delaunay";
    case GraphType::Pairs: return "pairs";
  }
  return "?";
}

GraphType parse_graph_type(std::string_view name) {
  if (name == "unidimensional") return GraphType::Unidimensional;
  if (name == "delaunay") return GraphType::Delaunay;
  if (name == "pairs") return GraphType::Pairs;
  throw InputError("unknown graph type '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// PairAmplitudes

PairAmplitudes::PairAmplitudes(std::size_t n, int grid_pairs, KernelKind kernel)
    : n_(n), grid_pairs_(grid_pairs), kernel_(kernel), values_(n < 2 ? 0 : n * (n - 1) / 2, 0.0f) {}

namespace {

constexpr std::array<char, 4> kMagic{'D', 'T', 'P', 'A'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void PairAmplitudes::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(kMagic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(n_));
  put_u32(out, static_cast<std::uint32_t>(grid_pairs_));
  put_u32(out, kernel_ == KernelKind::Gaussian ? 0u : 1u);
  for (float r : values_) put_u32(out, std::bit_cast<std::uint32_t>(r));
  if (!out) throw InputError("failed writing " + path.string());
}

PairAmplitudes PairAmplitudes::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DegenerateError("missing amplitude file " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw DegenerateError("not an amplitude file: " + path.string());
  const std::uint32_t n = get_u32(in);
  const std::uint32_t grid = get_u32(in);
  const std::uint32_t kernel_id = get_u32(in);
  if (!in || kernel_id > 1) throw DegenerateError("corrupt amplitude header in " + path.string());
  PairAmplitudes amps(n, static_cast<int>(grid), kernel_id == 0 ? KernelKind::Gaussian : KernelKind::StudentT7);
  for (float& r : amps.values_) r = std::bit_cast<float>(get_u32(in));
  if (!in) throw DegenerateError("truncated amplitude file " + path.string());
  return amps;
}

// ---------------------------------------------------------------------------
// ConnectionGraph

ConnectionGraph::ConnectionGraph(std::size_t n, std::vector<Edge> edges, GraphType type)
    : n_(n), type_(type), edges_(std::move(edges)) {
  for (Edge& e : edges_) {
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.j >= n_) throw InvariantError("edge endpoint out of range");
  }
  std::erase_if(edges_, [](const Edge& e) { return e.i == e.j; });
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  build_adjacency();
}

ConnectionGraph::ConnectionGraph(PairAmplitudes amplitudes, double lambda)
    : n_(amplitudes.n()), type_(GraphType::Pairs), lambda_(lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("lambda must lie in (0, 1)");
  const auto n = static_cast<std::uint32_t>(n_);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (static_cast<double>(amplitudes.at(i, j)) < lambda) edges_.push_back({i, j});
    }
  }
  amplitudes_ = std::move(amplitudes);
  build_adjacency();
}

void ConnectionGraph::build_adjacency() {
  std::vector<std::size_t> degree(n_, 0);
  for (const Edge& e : edges_) {
    ++degree[e.i];
    ++degree[e.j];
  }
  offsets_.assign(n_ + 1, 0);
  for (std::size_t v = 0; v < n_; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  adj_.resize(offsets_[n_]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  // Edges are sorted, so every adjacency list comes out ascending.
  for (const Edge& e : edges_) adj_[fill[e.i]++] = e.j;
  for (const Edge& e : edges_) adj_[fill[e.j]++] = e.i;
  for (std::size_t v = 0; v < n_; ++v) {
    std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
              adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
  }
}

const PairAmplitudes& ConnectionGraph::amplitudes() const {
  if (!amplitudes_) throw InputError("graph carries no pair amplitudes");
  return *amplitudes_;
}

// ---------------------------------------------------------------------------
// Builders

ConnectionGraph build_unidimensional(const Matrix& data) {
  if (data.cols() != 1) throw InputError("unidimensional graph needs d = 1");
  const std::size_t n = data.rows();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return data(a, 0) < data(b, 0); });
  std::vector<Edge> edges;
  for (std::size_t k = 1; k < n; ++k) edges.push_back({order[k - 1], order[k]});
  return {n, std::move(edges), GraphType::Unidimensional};
}

ConnectionGraph build_delaunay(const Matrix& data) {
  return {data.rows(), delaunay_edges(data), GraphType::Delaunay};
}

double valley_amplitude(std::span<const double> section) {
  const std::size_t k = section.size();
  if (k < 2) throw InputError("valley amplitude needs at least 2 section values");
  std::vector<double> right(k);
  right[k - 1] = section[k - 1];
  for (std::size_t t = k - 1; t-- > 0;) right[t] = std::max(right[t + 1], section[t]);
  double left = 0.0;
  double area_gap = 0.0;
  double area_env = 0.0;
  double prev_gap = 0.0;
  double prev_env = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    left = t == 0 ? section[0] : std::max(left, section[t]);
    const double env = std::min(left, right[t]);
    const double gap = env - section[t];
    if (t > 0) {
      area_gap += 0.5 * (prev_gap + gap);
      area_env += 0.5 * (prev_env + env);
    }
    prev_gap = gap;
    prev_env = env;
  }
  if (!(area_env > 0.0)) return 0.0;
  return area_gap / area_env;
}

namespace {

float store_amplitude(double r) {
  // R < 1 in exact arithmetic; keep it that way after narrowing.
  const auto f = static_cast<float>(r);
  return f < 1.0f ? f : std::nextafter(1.0f, 0.0f);
}

}  // namespace

ConnectionGraph build_pairs(const Matrix& data, KernelKind kernel, const Bandwidth& bw, int grid_pairs,
                            double lambda) {
  if (grid_pairs < 2) throw InputError("grid_pairs must be at least 2");
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("lambda must lie in (0, 1)");
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const detail::KernelSum ksum(data, kernel, bw);
  PairAmplitudes amps(n, grid_pairs, kernel);
  auto& values = amps.values();
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> y(d);
    std::vector<double> section(static_cast<std::size_t>(grid_pairs));
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const auto a = data.row(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto b = data.row(j);
        for (int k = 0; k < grid_pairs; ++k) {
          const double t = static_cast<double>(k) / static_cast<double>(grid_pairs - 1);
          for (std::size_t c = 0; c < d; ++c) y[c] = a[c] + t * (b[c] - a[c]);
          section[static_cast<std::size_t>(k)] = ksum(y);
        }
        values[PairAmplitudes::index(i, j, n)] = store_amplitude(valley_amplitude(section));
      }
    }
  }
  return {std::move(amps), lambda};
}

ConnectionGraph rethreshold(const ConnectionGraph& graph, double lambda) {
  if (graph.type() != GraphType::Pairs || !graph.has_amplitudes()) {
    throw InputError("rethreshold needs a pairs graph with stored amplitudes");
  }
  return {graph.amplitudes(), lambda};
}

// ---------------------------------------------------------------------------
// Components

Components connected_components(const ConnectionGraph& graph, const std::vector<bool>& active_mask) {
  const std::size_t n = graph.n();
  if (active_mask.size() != n) throw InputError("active mask size does not match the graph");
  Components out;
  out.label.assign(n, -1);
  std::vector<std::uint32_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (!active_mask[s] || out.label[s] >= 0) continue;
    const int id = out.count++;
    out.label[s] = id;
    stack.push_back(static_cast<std::uint32_t>(s));
    while (!stack.empty()) {
      const std::uint32_t v = stack.back();
      stack.pop_back();
      for (std::uint32_t w : graph.neighbors(v)) {
        if (active_mask[w] && out.label[w] < 0) {
          out.label[w] = id;
          stack.push_back(w);
        }
      }
    }
  }
  return out;
}

Components connected_components(const ConnectionGraph& graph, std::span<const std::size_t> active) {
  std::vector<bool> mask(graph.n(), false);
  for (std::size_t v : active) {
    if (v >= graph.n()) throw InputError("active vertex out of range");
    mask[v] = true;
  }
  return connected_components(graph, mask);
}

}  // namespace densitree
