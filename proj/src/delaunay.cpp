#include "densitree/delaunay.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "densitree/error.hpp"
#include "densitree/graph.hpp"

namespace densitree {

namespace {

constexpr int kMaxK = 4;
using DMat = std::array<std::array<double, kMaxK>, kMaxK>;
using QMat = std::array<std::array<mpq_class, kMaxK>, kMaxK>;

struct DetPerm {
  double det;
  double perm;
};

// Laplace expansion along rows; `perm` is the same expansion over absolute
// values and bounds the rounding error of `det`.
DetPerm expand(const DMat& a, int k, int row, unsigned used) {
  if (row == k) return {1.0, 1.0};
  DetPerm out{0.0, 0.0};
  double sgn = 1.0;
  for (int c = 0; c < k; ++c) {
    if (used & (1u << c)) continue;
    const DetPerm sub = expand(a, k, row + 1, used | (1u << c));
    out.det += sgn * a[row][c] * sub.det;
    out.perm += std::fabs(a[row][c]) * sub.perm;
    sgn = -sgn;
  }
  return out;
}

int exact_det_sign(QMat a, int k) {
  int sign = 1;
  for (int col = 0; col < k; ++col) {
    int pivot = -1;
    for (int r = col; r < k; ++r) {
      if (sgn(a[r][col]) != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) return 0;
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      sign = -sign;
    }
    for (int r = col + 1; r < k; ++r) {
      if (sgn(a[r][col]) == 0) continue;
      const mpq_class f = a[r][col] / a[col][col];
      for (int c = col; c < k; ++c) a[r][c] -= f * a[col][c];
    }
    if (sgn(a[col][col]) < 0) sign = -sign;
  }
  return sign;
}

bool filter_decides(const DetPerm& dp) {
  return dp.perm > 1e-250 && std::fabs(dp.det) > 1e-10 * dp.perm;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

int orientation_sign(std::span<const std::span<const double>> s) {
  const int d = static_cast<int>(s.size()) - 1;
  DMat a{};
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a[i][j] = s[i + 1][j] - s[0][j];
  }
  const DetPerm dp = expand(a, d, 0, 0);
  if (filter_decides(dp)) return sign_of(dp.det);
  QMat q;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) q[i][j] = mpq_class(s[i + 1][j]) - mpq_class(s[0][j]);
  }
  return exact_det_sign(q, d);
}

// det of rows [p_i - q, |p_i - q|^2], i = 0..d
int lifted_sign(std::span<const std::span<const double>> s, std::span<const double> pt) {
  const int d = static_cast<int>(s.size()) - 1;
  DMat a{};
  for (int i = 0; i <= d; ++i) {
    double sq = 0.0;
    for (int j = 0; j < d; ++j) {
      a[i][j] = s[i][j] - pt[j];
      sq += a[i][j] * a[i][j];
    }
    a[i][d] = sq;
  }
  const DetPerm dp = expand(a, d + 1, 0, 0);
  if (filter_decides(dp)) return sign_of(dp.det);
  QMat q;
  for (int i = 0; i <= d; ++i) {
    mpq_class sq = 0;
    for (int j = 0; j < d; ++j) {
      q[i][j] = mpq_class(s[i][j]) - mpq_class(pt[j]);
      sq += q[i][j] * q[i][j];
    }
    q[i][d] = sq;
  }
  return exact_det_sign(q, d + 1);
}

// sign(lifted) * sign(orientation) for a point known to be inside the
// circumsphere; fixes the convention for each dimension.
int inside_convention(int d) {
  static const std::array<int, 4> conv = [] {
    std::array<int, 4> out{};
    for (int dim = 2; dim <= 3; ++dim) {
      std::vector<std::vector<double>> verts(static_cast<std::size_t>(dim) + 1,
                                             std::vector<double>(static_cast<std::size_t>(dim), 0.0));
      for (int j = 0; j < dim; ++j) verts[static_cast<std::size_t>(j) + 1][static_cast<std::size_t>(j)] = 1.0;
      std::vector<std::span<const double>> s(verts.begin(), verts.end());
      const std::vector<double> inner(static_cast<std::size_t>(dim), 0.125);
      out[static_cast<std::size_t>(dim)] = lifted_sign(s, inner) * orientation_sign(s);
    }
    return out;
  }();
  return conv[static_cast<std::size_t>(d)];
}

// Exact affine rank test used only when picking the initial simplex.
bool raises_rank(const Matrix& pts, const std::vector<std::size_t>& chosen, std::size_t cand) {
  const std::size_t d = pts.cols();
  const std::size_t r = chosen.size();  // rows after adding cand minus the anchor
  std::vector<std::vector<mpq_class>> rows;
  for (std::size_t k = 1; k <= r; ++k) {
    const std::size_t idx = k < r ? chosen[k] : cand;
    std::vector<mpq_class> row(d);
    for (std::size_t j = 0; j < d; ++j) row[j] = mpq_class(pts(idx, j)) - mpq_class(pts(chosen[0], j));
    rows.push_back(std::move(row));
  }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < d && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && sgn(rows[pivot][col]) == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    for (std::size_t i = rank + 1; i < rows.size(); ++i) {
      if (sgn(rows[i][col]) == 0) continue;
      const mpq_class f = rows[i][col] / rows[rank][col];
      for (std::size_t c = col; c < d; ++c) rows[i][c] -= f * rows[rank][c];
    }
    ++rank;
  }
  return rank == rows.size();
}

template <int D>
class Triangulation {
 public:
  static constexpr int kInf = -1;
  using Verts = std::array<int, D + 1>;

  explicit Triangulation(const Matrix& pts) : pts_(pts) {}

  std::vector<Edge> run() {
    const std::size_t n = pts_.rows();
    if (n < static_cast<std::size_t>(D) + 1) {
      throw DegenerateError("Delaunay graph needs at least " + std::to_string(D + 1) + " points");
    }
    std::map<std::array<double, D>, std::size_t> seen;
    std::vector<std::size_t> twin(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::array<double, D> key;
      for (int j = 0; j < D; ++j) key[j] = pts_(i, static_cast<std::size_t>(j));
      twin[i] = seen.try_emplace(key, i).first->second;
    }

    std::vector<std::size_t> init{0};
    for (std::size_t i = 1; i < n && init.size() < static_cast<std::size_t>(D) + 1; ++i) {
      if (twin[i] == i && raises_rank(pts_, init, i)) init.push_back(i);
    }
    if (init.size() < static_cast<std::size_t>(D) + 1) {
      throw DegenerateError(D == 2 ? "all points are collinear" : "all points are coplanar");
    }
    seed(init);

    std::vector<char> inserted(n, 0);
    for (std::size_t i : init) inserted[i] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!inserted[i] && twin[i] == i) insert(static_cast<int>(i));
    }

    std::vector<Edge> edges;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      if (!alive_[c]) continue;
      const Verts& v = cells_[c];
      for (int a = 0; a <= D; ++a) {
        for (int b = a + 1; b <= D; ++b) {
          if (v[a] == kInf || v[b] == kInf) continue;
          const auto lo = static_cast<std::uint32_t>(std::min(v[a], v[b]));
          const auto hi = static_cast<std::uint32_t>(std::max(v[a], v[b]));
          edges.push_back({lo, hi});
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (twin[i] != i) edges.push_back({static_cast<std::uint32_t>(twin[i]), static_cast<std::uint32_t>(i)});
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
  }

 private:
  std::span<const double> point(int v) const { return pts_.row(static_cast<std::size_t>(v)); }

  // Orientation of cell c with its vertex at position k replaced by q.
  int orient_with(int c, int k, int q) const {
    std::array<std::span<const double>, D + 1> s;
    for (int j = 0; j <= D; ++j) s[j] = point(j == k ? q : cells_[c][j]);
    return orientation_sign(s);
  }

  bool finite_conflict(int c, int q) const {
    std::array<std::span<const double>, D + 1> s;
    for (int j = 0; j <= D; ++j) s[j] = point(cells_[c][j]);
    // Finite cells are kept positively oriented.
    return lifted_sign(s, point(q)) == inside_convention(D);
  }

  bool in_conflict(int c, int q) const {
    const Verts& v = cells_[c];
    const auto inf_pos = static_cast<int>(std::find(v.begin(), v.end(), kInf) - v.begin());
    if (inf_pos > D) return finite_conflict(c, q);
    const int o = orient_with(c, inf_pos, q);
    if (o != 0) return o > 0;
    return finite_conflict(nbrs_[c][inf_pos], q);
  }

  int add_cell(const Verts& v) {
    cells_.push_back(v);
    Verts none;
    none.fill(-1);
    nbrs_.push_back(none);
    alive_.push_back(1);
    stamp_.push_back(0);
    conflict_.push_back(0);
    return static_cast<int>(cells_.size()) - 1;
  }

  using FacetKey = std::array<int, D>;

  static FacetKey facet_key(const Verts& v, int skip) {
    FacetKey key;
    int t = 0;
    for (int j = 0; j <= D; ++j) {
      if (j != skip) key[t++] = v[j];
    }
    std::sort(key.begin(), key.end());
    return key;
  }

  void link_facets(const std::vector<int>& cells, const std::vector<int>& skip_pos) {
    std::map<FacetKey, std::pair<int, int>> open;
    for (std::size_t t = 0; t < cells.size(); ++t) {
      const int c = cells[t];
      for (int j = 0; j <= D; ++j) {
        if (j == skip_pos[t]) continue;
        const FacetKey key = facet_key(cells_[c], j);
        auto it = open.find(key);
        if (it == open.end()) {
          open.emplace(key, std::make_pair(c, j));
        } else {
          nbrs_[c][j] = it->second.first;
          nbrs_[it->second.first][it->second.second] = c;
          open.erase(it);
        }
      }
    }
    if (!open.empty()) throw InvariantError("Delaunay cavity left an unmatched facet");
  }

  void seed(const std::vector<std::size_t>& init) {
    Verts v;
    for (int j = 0; j <= D; ++j) v[j] = static_cast<int>(init[static_cast<std::size_t>(j)]);
    std::array<std::span<const double>, D + 1> s;
    for (int j = 0; j <= D; ++j) s[j] = point(v[j]);
    if (orientation_sign(s) < 0) std::swap(v[0], v[1]);
    std::vector<int> made{add_cell(v)};
    for (int k = 0; k <= D; ++k) {
      Verts g = v;
      g[k] = kInf;
      // Flip so that a point beyond the hull facet gives positive orientation.
      const int a = k == 0 ? 1 : 0;
      const int b = k <= 1 ? 2 : 1;
      std::swap(g[a], g[b]);
      made.push_back(add_cell(g));
    }
    link_facets(made, std::vector<int>(made.size(), -1));
    last_ = 0;
  }

  int locate(int q) {
    int c = last_;
    if (!alive_[c]) c = -1;
    const std::size_t cap = 4 * cells_.size() + 16;
    for (std::size_t step = 0; c >= 0 && step < cap; ++step) {
      const Verts& v = cells_[c];
      if (std::find(v.begin(), v.end(), kInf) != v.end()) {
        if (in_conflict(c, q)) return c;
        break;
      }
      int next = -1;
      for (int k = 0; k <= D; ++k) {
        if (orient_with(c, k, q) < 0) {
          next = nbrs_[c][k];
          break;
        }
      }
      if (next < 0) {
        if (in_conflict(c, q)) return c;
        break;
      }
      c = next;
    }
    for (std::size_t t = 0; t < cells_.size(); ++t) {
      if (alive_[t] && in_conflict(static_cast<int>(t), q)) return static_cast<int>(t);
    }
    throw InvariantError("point " + std::to_string(q + 1) + " conflicts with no Delaunay cell");
  }

  void insert(int q) {
    const int start = locate(q);
    ++round_;
    std::vector<int> region{start};
    std::vector<int> stack{start};
    stamp_[start] = round_;
    conflict_[start] = 1;
    struct Boundary {
      int cell;
      int pos;
      int outside;
    };
    std::vector<Boundary> boundary;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      for (int k = 0; k <= D; ++k) {
        const int nb = nbrs_[c][k];
        if (stamp_[nb] != round_) {
          stamp_[nb] = round_;
          conflict_[nb] = in_conflict(nb, q) ? 1 : 0;
          if (conflict_[nb]) {
            region.push_back(nb);
            stack.push_back(nb);
          }
        }
        if (!conflict_[nb]) boundary.push_back({c, k, nb});
      }
    }
    std::vector<int> made;
    std::vector<int> qpos;
    for (const Boundary& f : boundary) {
      Verts v = cells_[f.cell];
      v[f.pos] = q;
      const int nc = add_cell(v);
      nbrs_[nc][f.pos] = f.outside;
      for (int j = 0; j <= D; ++j) {
        if (nbrs_[f.outside][j] == f.cell) nbrs_[f.outside][j] = nc;
      }
      made.push_back(nc);
      qpos.push_back(f.pos);
    }
    for (int c : region) alive_[c] = 0;
    link_facets(made, qpos);
    last_ = made.front();
  }

  const Matrix& pts_;
  std::vector<Verts> cells_;
  std::vector<Verts> nbrs_;
  std::vector<char> alive_;
  std::vector<int> stamp_;
  std::vector<char> conflict_;
  int round_ = 0;
  int last_ = 0;
};

}  // namespace

namespace predicates {

int orientation(std::span<const std::span<const double>> simplex) {
  const std::size_t d = simplex.size() - 1;
  if (d < 2 || d > 3) throw InputError("orientation supports d = 2 or 3");
  return orientation_sign(simplex);
}

int in_sphere(std::span<const std::span<const double>> simplex, std::span<const double> q) {
  const std::size_t d = simplex.size() - 1;
  if (d < 2 || d > 3) throw InputError("in_sphere supports d = 2 or 3");
  const int o = orientation_sign(simplex);
  if (o == 0) throw DegenerateError("in_sphere on a flat simplex");
  return lifted_sign(simplex, q) * o * inside_convention(static_cast<int>(d));
}

}  // namespace predicates

std::vector<Edge> delaunay_edges(const Matrix& points) {
  for (double v : points.values()) {
    if (!std::isfinite(v)) throw InputError("Delaunay input has a non-finite coordinate");
  }
  if (points.cols() == 2) return Triangulation<2>(points).run();
  if (points.cols() == 3) return Triangulation<3>(points).run();
  throw InputError("Delaunay graph supports d = 2 or 3 only");
}

}  // namespace densitree
