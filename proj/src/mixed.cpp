#include "densitree/mixed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>

#include "densitree/error.hpp"

namespace densitree {

ColumnType parse_column_type(const std::string& name) {
  if (name == "numeric") return ColumnType::Numeric;
  if (name == "ordratio") return ColumnType::OrdRatio;
  if (name == "symm") return ColumnType::SymBinary;
  if (name == "asymm") return ColumnType::AsymBinary;
  if (name == "nominal") return ColumnType::Nominal;
  throw InputError("unknown column type '" + name + "' (numeric, ordratio, symm, asymm, nominal)");
}

namespace {

bool is_missing(const std::string& s) { return s.empty() || s == "NA"; }

std::optional<double> to_number(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Average ranks (1-based) of the present values; ties share the mean rank.
std::vector<std::optional<double>> average_ranks(const std::vector<std::optional<double>>& x) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i]) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return *x[a] < *x[b]; });
  std::vector<std::optional<double>> rank(x.size());
  for (std::size_t s = 0; s < idx.size();) {
    std::size_t e = s;
    while (e + 1 < idx.size() && *x[idx[e + 1]] == *x[idx[s]]) ++e;
    const double r = 0.5 * static_cast<double>(s + e) + 1.0;
    for (std::size_t t = s; t <= e; ++t) rank[idx[t]] = r;
    s = e + 1;
  }
  return rank;
}

struct Prepared {
  ColumnType type;
  std::vector<std::optional<double>> value;  // interval-scaled, divided by range
  std::vector<int> code;                     // categories; -1 missing
};

Prepared prepare(const MixedColumn& col) {
  Prepared p{col.type, {}, {}};
  const std::size_t n = col.cells.size();
  auto bad = [&](std::size_t i) {
    return InputError("column '" + col.name + "', row " + std::to_string(i + 1) + ": invalid value '" +
                      col.cells[i] + "'");
  };
  switch (col.type) {
    case ColumnType::Numeric:
    case ColumnType::OrdRatio: {
      std::vector<std::optional<double>> x(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (is_missing(col.cells[i])) continue;
        if (col.type == ColumnType::OrdRatio && !col.levels.empty()) {
          const auto it = std::find(col.levels.begin(), col.levels.end(), col.cells[i]);
          if (it == col.levels.end()) throw bad(i);
          x[i] = static_cast<double>(it - col.levels.begin());
        } else {
          x[i] = to_number(col.cells[i]);
          if (!x[i]) throw bad(i);
        }
      }
      if (col.type == ColumnType::OrdRatio) x = average_ranks(x);
      double lo = HUGE_VAL;
      double hi = -HUGE_VAL;
      for (const auto& v : x) {
        if (v) {
          lo = std::min(lo, *v);
          hi = std::max(hi, *v);
        }
      }
      const double range = hi - lo;
      p.value.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i]) p.value[i] = range > 0.0 ? (*x[i] - lo) / range : 0.0;
      }
      break;
    }
    case ColumnType::SymBinary:
    case ColumnType::AsymBinary: {
      p.code.assign(n, -1);
      for (std::size_t i = 0; i < n; ++i) {
        if (is_missing(col.cells[i])) continue;
        const auto v = to_number(col.cells[i]);
        if (!v || (*v != 0.0 && *v != 1.0)) throw bad(i);
        p.code[i] = static_cast<int>(*v);
      }
      break;
    }
    case ColumnType::Nominal: {
      std::map<std::string, int> ids;
      p.code.assign(n, -1);
      for (std::size_t i = 0; i < n; ++i) {
        if (is_missing(col.cells[i])) continue;
        p.code[i] = ids.try_emplace(col.cells[i], static_cast<int>(ids.size())).first->second;
      }
      break;
    }
  }
  return p;
}

}  // namespace

Matrix gower(const MixedTable& table) {
  if (table.columns.empty()) throw InputError("mixed table has no columns");
  const std::size_t n = table.rows();
  if (n < 2) throw InputError("Gower dissimilarity needs at least two rows");
  std::vector<Prepared> cols;
  for (const auto& c : table.columns) {
    if (c.cells.size() != n) throw InputError("column '" + c.name + "' has a different length");
    cols.push_back(prepare(c));
  }
  Matrix out(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double num = 0.0;
      double den = 0.0;
      for (const Prepared& c : cols) {
        if (c.type == ColumnType::Numeric || c.type == ColumnType::OrdRatio) {
          if (!c.value[i] || !c.value[j]) continue;
          num += std::fabs(*c.value[i] - *c.value[j]);
          den += 1.0;
          continue;
        }
        const int a = c.code[i];
        const int b = c.code[j];
        if (a < 0 || b < 0) continue;
        if (c.type == ColumnType::AsymBinary && a == 0 && b == 0) continue;
        num += a == b ? 0.0 : 1.0;
        den += 1.0;
      }
      if (den == 0.0) {
        throw DegenerateError("rows " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                              " share no usable variable");
      }
      out(i, j) = out(j, i) = num / den;
    }
  }
  return out;
}

SymmetricEigen jacobi_eigen(const Matrix& input, double tol) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw InputError("eigen-decomposition needs a square matrix");
  Matrix a = input;
  Matrix v(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
  double scale = 0.0;
  for (double x : a.values()) scale += x * x;
  scale = std::sqrt(scale);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(2.0 * off) <= tol * std::max(scale, 1e-300)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

MdsResult classical_mds(const Matrix& dis, int k) {
  const std::size_t n = dis.rows();
  if (dis.cols() != n) throw InputError("dissimilarity matrix must be square");
  if (k < 1 || static_cast<std::size_t>(k) >= n) throw InputError("k must lie in 1..n-1");
  // B = -1/2 J D2 J via row, column and grand means of the squared entries.
  Matrix b(n, n);
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double sq = dis(i, j) * dis(i, j);
      b(i, j) = sq;
      row_mean[i] += sq;
    }
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
  }
  grand /= static_cast<double>(n) * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) b(i, j) = -0.5 * (b(i, j) - row_mean[i] - row_mean[j] + grand);
  }
  SymmetricEigen eig = jacobi_eigen(b);

  const double top = std::max(std::fabs(eig.values.front()), std::fabs(eig.values.back()));
  std::size_t positive = 0;
  while (positive < n && eig.values[positive] > 1e-10 * top) ++positive;
  if (static_cast<std::size_t>(k) > positive) {
    throw DegenerateError("only " + std::to_string(positive) + " positive eigenvalues; choose k <= " +
                          std::to_string(positive));
  }
  MdsResult out{Matrix(n, static_cast<std::size_t>(k)), eig.values};
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
    std::size_t big = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::fabs(eig.vectors(i, c)) > std::fabs(eig.vectors(big, c))) big = i;
    }
    const double sign = eig.vectors(big, c) < 0.0 ? -1.0 : 1.0;
    const double root = std::sqrt(eig.values[c]);
    for (std::size_t i = 0; i < n; ++i) out.coords(i, c) = sign * root * eig.vectors(i, c);
  }
  return out;
}

}  // namespace densitree
