#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "densitree/error.hpp"
#include "densitree/graph.hpp"
#include "densitree/parallel.hpp"
#include "densitree/reference.hpp"
#include "support/oracles.hpp"

using namespace densitree;

namespace {

Matrix column(std::vector<double> v) {
  const std::size_t n = v.size();
  return Matrix(n, 1, std::move(v));
}

oracle::EdgeSet edge_set(const ConnectionGraph& g) {
  oracle::EdgeSet out;
  for (const auto& e : g.edges()) out.insert({e.i, e.j});
  return out;
}

Matrix bimodal_1d(std::mt19937_64& rng, std::size_t per_mode, double gap) {
  std::normal_distribution<double> z;
  std::vector<double> v;
  for (std::size_t i = 0; i < per_mode; ++i) v.push_back(z(rng) - gap / 2);
  for (std::size_t i = 0; i < per_mode; ++i) v.push_back(z(rng) + gap / 2);
  return column(v);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("densitree-test-" + name);
}

}  // namespace

TEST_CASE("graph type names") {
  CHECK(parse_graph_type("pairs") == GraphType::Pairs);
  CHECK(parse_graph_type("delaunay") == GraphType::Delaunay);
  CHECK(parse_graph_type("unidimensional") == GraphType::Unidimensional);
  CHECK_THROWS_AS(parse_graph_type("knn"), InputError);
}

TEST_CASE("unidimensional graph joins sorted neighbours") {
  const auto g = build_unidimensional(column({3.0, 1.0, 2.0}));
  CHECK(edge_set(g) == oracle::EdgeSet{{1, 2}, {0, 2}});
  CHECK(build_unidimensional(column({5.0})).edges().empty());
  const auto ties = build_unidimensional(column({1.0, 0.0, 1.0, 1.0}));
  CHECK(edge_set(ties) == oracle::EdgeSet{{0, 1}, {0, 2}, {2, 3}});
}

TEST_CASE("unidimensional graph splits a bimodal level set in two") {
  std::mt19937_64 rng(21);
  const Matrix x = bimodal_1d(rng, 100, 8.0);
  const auto bw = Bandwidth::fixed(h_norm(x));
  const auto f = density(x, x, KernelKind::Gaussian, bw);
  // Modes and valley of the estimate from a fine grid.
  const int steps = 4000;
  std::vector<double> fg;
  Matrix pts(steps + 1, 1);
  for (int k = 0; k <= steps; ++k) pts(static_cast<std::size_t>(k), 0) = -8.0 + 16.0 * k / steps;
  fg = density(pts, x, KernelKind::Gaussian, bw);
  const auto mid = static_cast<std::size_t>(steps / 2);
  const double left_peak = *std::max_element(fg.begin(), fg.begin() + static_cast<std::ptrdiff_t>(mid));
  const double right_peak = *std::max_element(fg.begin() + static_cast<std::ptrdiff_t>(mid), fg.end());
  const auto lo = std::max_element(fg.begin(), fg.begin() + static_cast<std::ptrdiff_t>(mid));
  const auto hi = std::max_element(fg.begin() + static_cast<std::ptrdiff_t>(mid), fg.end());
  const double valley = *std::min_element(lo, hi);
  const double c = 0.5 * (valley + std::min(left_peak, right_peak));

  // Oracle: intervals of {f >= c} on the fine grid that hold a sample point.
  int intervals = 0;
  for (int k = 0; k <= steps; ++k) {
    if (fg[static_cast<std::size_t>(k)] >= c && (k == 0 || fg[static_cast<std::size_t>(k - 1)] < c)) {
      const double start = pts(static_cast<std::size_t>(k), 0);
      int e = k;
      while (e < steps && fg[static_cast<std::size_t>(e + 1)] >= c) ++e;
      const double end = pts(static_cast<std::size_t>(e), 0);
      for (std::size_t i = 0; i < x.rows(); ++i) {
        if (x(i, 0) >= start && x(i, 0) <= end && f[i] >= c) {
          ++intervals;
          break;
        }
      }
    }
  }
  std::vector<bool> active(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) active[i] = f[i] >= c;
  const auto comps = connected_components(build_unidimensional(x), active);
  CHECK(intervals == 2);
  CHECK(comps.count == 2);
}

TEST_CASE("valley amplitude examples") {
  CHECK(valley_amplitude(std::vector<double>{1, 0, 1}) == doctest::Approx(0.5));
  CHECK(valley_amplitude(std::vector<double>{1, 1, 1}) == 0.0);
  CHECK(valley_amplitude(std::vector<double>{0, 0, 0, 0}) == 0.0);
  CHECK(valley_amplitude(std::vector<double>{1, 2, 3, 2.5, 1}) == 0.0);
  CHECK(valley_amplitude(std::vector<double>{0.2, 0.4, 0.6}) == 0.0);
  // f = (2,0,1,1), g = (2,1,1,1): T(g-f) = 1, T(g) = 3.5
  CHECK(valley_amplitude(std::vector<double>{2, 0, 1, 1}) == doctest::Approx(1.0 / 3.5));
  CHECK_THROWS_AS(valley_amplitude(std::vector<double>{1}), InputError);
}

TEST_CASE("pairs graph on a monotone section") {
  const Matrix x = column({0.0, 1.0});
  const auto g = build_pairs(x, KernelKind::Gaussian, Bandwidth::fixed({3.0}), 10, 0.1);
  CHECK(g.amplitudes().at(0, 1) == 0.0f);
  CHECK(edge_set(g) == oracle::EdgeSet{{0, 1}});
}

TEST_CASE("pairs graph across a deep valley") {
  std::mt19937_64 rng(22);
  const Matrix x = bimodal_1d(rng, 40, 12.0);
  std::vector<double> v = x.column(0);
  const double c1 = -6.0, c2 = 6.0;
  std::vector<double> with_centres = v;
  with_centres.push_back(c1);
  with_centres.push_back(c2);
  const Matrix xc = column(with_centres);
  const std::vector<double> h{1.0};  // the normal-reference rule would smooth the valley away
  const auto g = build_pairs(xc, KernelKind::Gaussian, Bandwidth::fixed(h), 10, 0.1);
  const std::size_t a = xc.rows() - 2, b = xc.rows() - 1;
  const double r = g.amplitudes().at(a, b);
  // Each bump carries about sqrt(2 pi) sqrt(2) / 2 of peak-height area, so R is near 1 - 3.5 / 12.
  CHECK(r > 0.6);
  CHECK(std::fabs(r - oracle::fine_valley({c1}, {c2}, xc, h, 100)) < 0.05);
  CHECK(std::find(g.edges().begin(), g.edges().end(),
                  Edge{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)}) == g.edges().end());
}

TEST_CASE("pairs graph argument checks") {
  const Matrix x = column({0.0, 1.0, 2.0});
  const auto bw = Bandwidth::fixed({1.0});
  CHECK_THROWS_AS(build_pairs(x, KernelKind::Gaussian, bw, 1, 0.1), InputError);
  CHECK_THROWS_AS(build_pairs(x, KernelKind::Gaussian, bw, 10, 0.0), InputError);
  CHECK_THROWS_AS(build_pairs(x, KernelKind::Gaussian, bw, 10, 1.0), InputError);
  CHECK_THROWS_AS(rethreshold(build_unidimensional(x), 0.2), InputError);
}

TEST_CASE("rethreshold matches a rebuild and is idempotent") {
  std::mt19937_64 rng(23);
  const Matrix x = oracle::normal_sample(rng, 40, 4);
  const auto bw = Bandwidth::fixed(h_norm(x));
  const auto g1 = build_pairs(x, KernelKind::Gaussian, bw, 10, 0.1);
  const auto g2 = build_pairs(x, KernelKind::Gaussian, bw, 10, 0.2);
  const auto re = rethreshold(g1, 0.2);
  CHECK(re.edges() == g2.edges());
  CHECK(re.amplitudes() == g2.amplitudes());
  CHECK(rethreshold(g1, 0.1).edges() == g1.edges());
  const double near_one = std::nextafter(1.0, 0.0);
  std::size_t below = 0;
  for (float r : g1.amplitudes().values()) below += r < near_one ? 1 : 0;
  CHECK(rethreshold(g1, near_one).edges().size() == below);
}

TEST_CASE("amplitude file round trip") {
  std::mt19937_64 rng(24);
  const Matrix x = oracle::normal_sample(rng, 30, 5);
  const auto g = build_pairs(x, KernelKind::StudentT7, Bandwidth::fixed(h_norm(x)), 7, 0.1);
  const auto path = temp_file("amps.bin");
  g.amplitudes().save(path);
  const auto back = PairAmplitudes::load(path);
  CHECK(back == g.amplitudes());
  CHECK(back.grid_pairs() == 7);
  CHECK(back.kernel() == KernelKind::StudentT7);
  CHECK(std::filesystem::file_size(path) == 16 + 4 * (30 * 29 / 2));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(PairAmplitudes::load(path), DegenerateError);
}

TEST_CASE("parallel pairs amplitudes agree with the serial reference") {
  std::mt19937_64 rng(25);
  const Matrix x = oracle::normal_sample(rng, 70, 3);
  const auto bw = Bandwidth::fixed(h_norm(x));
  set_thread_count(1);
  const auto one = build_pairs(x, KernelKind::Gaussian, bw, 10, 0.1);
  set_thread_count(4);
  const auto four = build_pairs(x, KernelKind::Gaussian, bw, 10, 0.1);
  set_thread_count(0);
  CHECK(one.amplitudes() == four.amplitudes());
  const auto ref = reference::pair_amplitudes(x, KernelKind::Gaussian, bw, 10);
  REQUIRE(ref.values().size() == one.amplitudes().values().size());
  for (std::size_t k = 0; k < ref.values().size(); ++k) {
    CHECK(std::fabs(ref.values()[k] - one.amplitudes().values()[k]) < 1e-6f);
  }
}

TEST_CASE("components examples") {
  const ConnectionGraph empty(4, {}, GraphType::Pairs);
  CHECK(connected_components(empty, std::vector<bool>(4, true)).count == 4);
  const ConnectionGraph path(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, GraphType::Pairs);
  const std::vector<std::size_t> active{0, 1, 3, 4};
  const auto c = connected_components(path, active);
  CHECK(c.count == 2);
  CHECK(c.label == std::vector<int>{0, 0, -1, 1, 1});
}

TEST_CASE("edge list normalization") {
  const ConnectionGraph g(3, {{2, 0}, {0, 2}, {1, 1}, {0, 1}}, GraphType::Pairs);
  CHECK(g.edges() == std::vector<Edge>{{0, 1}, {0, 2}});
  CHECK(g.neighbors(0).size() == 2);
  CHECK(g.neighbors(1).size() == 1);
}

TEST_SUITE("property") {
  TEST_CASE("components agree with a reachability oracle") {
    std::mt19937_64 rng(201);
    for (int trial = 0; trial < 150; ++trial) {
      std::uniform_int_distribution<std::size_t> nn(1, 30);
      const std::size_t n = nn(rng);
      std::uniform_real_distribution<double> u;
      const double p_edge = u(rng) * 0.25;
      std::vector<Edge> edges;
      oracle::EdgeSet es;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (u(rng) < p_edge) {
            edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
            es.insert({i, j});
          }
      std::shuffle(edges.begin(), edges.end(), rng);
      std::vector<bool> active(n);
      for (std::size_t i = 0; i < n; ++i) active[i] = u(rng) < 0.7;
      const ConnectionGraph g(n, edges, GraphType::Pairs);
      const auto comps = connected_components(g, active);
      std::map<int, std::set<std::size_t>> by_label;
      int last_new = -1;
      for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) {
          CHECK(comps.label[i] == -1);
          continue;
        }
        if (!by_label.count(comps.label[i])) {
          // labels appear in order of their smallest vertex
          CHECK(comps.label[i] == last_new + 1);
          last_new = comps.label[i];
        }
        by_label[comps.label[i]].insert(i);
      }
      std::set<std::set<std::size_t>> got;
      for (auto& [_, s] : by_label) got.insert(s);
      CHECK(got == oracle::reachability_partition(n, es, active));
      CHECK(comps.count == static_cast<int>(got.size()));
    }
  }

  TEST_CASE("valley amplitude invariances") {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> len(2, 40);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> f(static_cast<std::size_t>(len(rng)));
      for (auto& v : f) v = u(rng) < 0.1 ? 0.0 : u(rng);
      const double r = valley_amplitude(f);
      CHECK(r >= 0.0);
      CHECK(r < 1.0);
      std::vector<double> rev(f.rbegin(), f.rend());
      CHECK(valley_amplitude(rev) == doctest::Approx(r).epsilon(1e-12));
      const double alpha = std::exp(8.0 * (u(rng) - 0.5));
      std::vector<double> scaled(f);
      for (auto& v : scaled) v *= alpha;
      CHECK(valley_amplitude(scaled) == doctest::Approx(r).epsilon(1e-12));

      // Zero exactly when the section equals its envelope.
      bool filled = true;
      for (std::size_t t = 0; t < f.size(); ++t) {
        const double left = *std::max_element(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(t) + 1);
        const double right = *std::max_element(f.begin() + static_cast<std::ptrdiff_t>(t), f.end());
        if (std::min(left, right) != f[t]) filled = false;
      }
      CHECK((r == 0.0) == filled);
    }
  }

  TEST_CASE("concave sections have no valley") {
    std::mt19937_64 rng(203);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 2 + trial % 30;
      const double top = 1.0 + u(rng), curv = u(rng), t0 = 2.0 * u(rng) - 0.5;
      std::vector<double> f(static_cast<std::size_t>(k));
      for (int t = 0; t < k; ++t) {
        const double s = static_cast<double>(t) / (k - 1) - t0;
        f[static_cast<std::size_t>(t)] = top - curv * s * s;
      }
      CHECK(valley_amplitude(f) == 0.0);
    }
  }

  TEST_CASE("valley amplitude is close to a finer-grid oracle on bimodal sections") {
    std::mt19937_64 rng(204);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 100; ++trial) {
      const double gap = 2.0 + 6.0 * u(rng);
      const std::size_t n = 40;
      std::vector<double> v;
      for (std::size_t i = 0; i < n; ++i) v.push_back(z(rng) + (i % 2 ? gap / 2 : -gap / 2));
      const Matrix x = column(v);
      const auto h = h_norm(x);
      const std::vector<double> a{-gap / 2 + 0.5 * z(rng)}, b{gap / 2 + 0.5 * z(rng)};
      const auto section = eval_segment(a, b, 10, x, KernelKind::Gaussian, Bandwidth::fixed(h));
      CAPTURE(gap);
      CHECK(std::fabs(valley_amplitude(section) - oracle::fine_valley(a, b, x, h, 100)) < 0.05);
    }
  }

  TEST_CASE("pairs edges grow with lambda") {
    std::mt19937_64 rng(205);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    const Matrix x = oracle::normal_sample(rng, 40, 3);
    const auto g = build_pairs(x, KernelKind::Gaussian, Bandwidth::fixed(h_norm(x)), 10, 0.5);
    for (int trial = 0; trial < 100; ++trial) {
      double l1 = u(rng), l2 = u(rng);
      if (l1 > l2) std::swap(l1, l2);
      const auto e1 = edge_set(rethreshold(g, l1));
      const auto e2 = edge_set(rethreshold(g, l2));
      CHECK(std::includes(e2.begin(), e2.end(), e1.begin(), e1.end()));
      for (const auto& [i, j] : e2) CHECK(g.amplitudes().at(i, j) < l2);
    }
  }
}
