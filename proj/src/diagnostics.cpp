#include "densitree/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "densitree/classify.hpp"
#include "densitree/error.hpp"

namespace densitree {

DbsResult dbs(const Matrix& data, std::span<const int> labels, std::optional<std::vector<double>> priors,
              KernelKind kernel, double hmult) {
  const std::size_t n = data.rows();
  if (labels.size() != n) throw InputError("labels and data differ in length");
  int M = 0;
  for (int l : labels) {
    if (l < 1) throw InputError("dbs needs labels in 1..M for every point");
    M = std::max(M, l);
  }
  if (M < 2) throw InputError("dbs needs at least two classes");
  const auto m_count = static_cast<std::size_t>(M);
  std::vector<std::vector<std::size_t>> members(m_count);
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(labels[i] - 1)].push_back(i);
  for (std::size_t m = 0; m < m_count; ++m) {
    if (members[m].empty()) throw InputError("class " + std::to_string(m + 1) + " is empty");
  }

  DbsResult out;
  if (priors) {
    if (priors->size() != m_count) throw InputError("need one prior per class");
    double sum = 0.0;
    for (double p : *priors) {
      if (!(p > 0.0) || !std::isfinite(p)) throw InputError("priors must be positive");
      sum += p;
    }
    out.priors_rescaled = std::fabs(sum - 1.0) > 1e-12;
    for (double& p : *priors) p /= sum;
    out.priors = std::move(*priors);
  } else {
    for (const auto& g : members) out.priors.push_back(static_cast<double>(g.size()) / static_cast<double>(n));
  }

  auto global = h_norm(data);
  for (double& v : global) v *= hmult;
  std::vector<std::vector<double>> f(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    const Matrix g = data.select_rows(members[m]);
    f[m] = density(data, g, kernel, Bandwidth::fixed(group_bandwidth(g, hmult, global)));
  }

  std::vector<double> raw(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i] - 1);
    double rival = -1.0;
    for (std::size_t m = 0; m < m_count; ++m) {
      if (m != own) rival = std::max(rival, out.priors[m] * f[m][i]);
    }
    const double mine = out.priors[own] * f[own][i];
    if (mine > 0.0 && rival > 0.0) {
      raw[i] = std::log(mine / rival);
      scale = std::max(scale, std::fabs(raw[i]));
    } else if (mine > 0.0) {
      raw[i] = HUGE_VAL;
    } else if (rival > 0.0) {
      raw[i] = -HUGE_VAL;
    } else {
      raw[i] = 0.0;
    }
  }
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isinf(raw[i])) {
      out.values[i] = raw[i] > 0.0 ? 1.0 : -1.0;
    } else {
      out.values[i] = scale > 0.0 ? raw[i] / scale : 0.0;
    }
  }
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InputError("label vectors differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw InputError("adjusted Rand index needs at least two points");
  auto pairs = [](double k) { return k * (k - 1.0) / 2.0; };
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, c] : table) index += pairs(c);
  double sa = 0.0;
  for (const auto& [key, c] : rows) sa += pairs(c);
  double sb = 0.0;
  for (const auto& [key, c] : cols) sb += pairs(c);
  const double expected = sa * sb / pairs(static_cast<double>(n));
  const double denom = 0.5 * (sa + sb) - expected;
  if (denom == 0.0) {
    // Both sides all-singletons or both one class; the table is then diagonal iff identical.
    const bool same = table.size() == rows.size() && table.size() == cols.size();
    return same ? 1.0 : 0.0;
  }
  return (index - expected) / denom;
}

}  // namespace densitree
