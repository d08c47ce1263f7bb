#include "densitree/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "densitree/error.hpp"

namespace densitree {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

RatioScore log_ratio(std::span<const double> f) {
  if (f.size() < 2) throw InputError("log ratio needs at least two groups");
  RatioScore out;
  std::size_t best = 0;
  for (std::size_t m = 1; m < f.size(); ++m) {
    if (f[m] > f[best]) best = m;
  }
  if (!(f[best] > 0.0)) return out;
  std::size_t second = best == 0 ? 1 : 0;
  for (std::size_t m = 0; m < f.size(); ++m) {
    if (m != best && f[m] > f[second]) second = m;
  }
  out.label = static_cast<int>(best) + 1;
  out.runner_up = static_cast<int>(second) + 1;
  out.r = f[second] > 0.0 ? std::log(f[best] / f[second]) : kInf;
  return out;
}

double log_density_variance(KernelKind kernel, std::size_t d, std::size_t n_m, double h_prod, double f) {
  if (!(f > 0.0)) return kInf;
  const double rk = std::pow(kernel_roughness(kernel), static_cast<double>(d));
  return rk / (static_cast<double>(n_m) * h_prod * f);
}

double se_weighted_ratio(double r, double var_a, double var_b) {
  if (std::isinf(r)) return r;
  return r / std::sqrt(var_a + var_b);
}

std::vector<double> group_bandwidth(const Matrix& members, double hmult, const std::vector<double>& fallback) {
  if (members.rows() < 2) return fallback;
  try {
    auto h = h_norm(members);
    for (double& v : h) v *= hmult;
    return h;
  } catch (const DegenerateError&) {
    return fallback;
  }
}

ClassifyResult classify(const Matrix& data, const CoreAssignment& cores, const ClassifyConfig& cfg) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (cores.labels.size() != n) throw InputError("core labels and data differ in length");
  if (cfg.n_stage < 0) throw InputError("n_stage must be non-negative");
  if (cores.M < 1) throw InputError("classification needs at least one cluster core");
  if (cfg.global_h.size() != d) throw InputError("global bandwidth dimension does not match the data");

  ClassifyResult res;
  res.labels = cores.labels;
  std::vector<std::size_t> initial;
  for (std::size_t i = 0; i < n; ++i) {
    if (res.labels[i] == 0) initial.push_back(i);
  }
  if (cfg.n_stage == 0 || initial.empty()) return res;

  if (cores.M == 1) {
    for (std::size_t i : initial) {
      res.labels[i] = 1;
      res.trace.push_back({i, 1, 1, kInf});
    }
    res.stages.push_back(res.labels);
    return res;
  }

  const auto M = static_cast<std::size_t>(cores.M);
  const std::size_t block = (initial.size() + static_cast<std::size_t>(cfg.n_stage) - 1) /
                            static_cast<std::size_t>(cfg.n_stage);
  const std::vector<int> core_labels = cores.labels;

  for (int stage = 1; stage <= cfg.n_stage; ++stage) {
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < n; ++i) {
      if (res.labels[i] == 0) pending.push_back(i);
    }
    if (pending.empty()) break;
    const bool last = stage == cfg.n_stage;
    const Matrix eval = data.select_rows(pending);

    std::vector<std::vector<double>> dens(M);
    std::vector<std::size_t> sizes(M);
    std::vector<double> hprod(M);
    for (std::size_t m = 0; m < M; ++m) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i) {
        if (res.labels[i] == static_cast<int>(m) + 1) idx.push_back(i);
      }
      const Matrix members = data.select_rows(idx);
      const auto h = cfg.hcores ? cfg.global_h : group_bandwidth(members, cfg.hmult, cfg.global_h);
      sizes[m] = idx.size();
      hprod[m] = std::accumulate(h.begin(), h.end(), 1.0, std::multiplies<>());
      dens[m] = density(eval, members, cfg.kernel, Bandwidth::fixed(h));
    }

    struct Candidate {
      std::size_t slot;
      int label;
      double score;
    };
    std::vector<Candidate> ranked;
    std::vector<std::size_t> deferred;
    std::vector<double> f(M);
    for (std::size_t k = 0; k < pending.size(); ++k) {
      for (std::size_t m = 0; m < M; ++m) f[m] = dens[m][k];
      const RatioScore rs = log_ratio(f);
      if (rs.label == 0) {
        deferred.push_back(k);
        continue;
      }
      double score = rs.r;
      if (cfg.se) {
        const auto a = static_cast<std::size_t>(rs.label - 1);
        const auto b = static_cast<std::size_t>(rs.runner_up - 1);
        score = se_weighted_ratio(rs.r, log_density_variance(cfg.kernel, d, sizes[a], hprod[a], f[a]),
                                  log_density_variance(cfg.kernel, d, sizes[b], hprod[b], f[b]));
      }
      ranked.push_back({k, rs.label, score});
    }
    std::sort(ranked.begin(), ranked.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      return pending[a.slot] < pending[b.slot];
    });
    const std::size_t take = last ? ranked.size() : std::min(block, ranked.size());
    for (std::size_t t = 0; t < take; ++t) {
      const std::size_t i = pending[ranked[t].slot];
      res.labels[i] = ranked[t].label;
      res.trace.push_back({i, stage, ranked[t].label, ranked[t].score});
    }
    if (last) {
      // Zero density under every group: take the label of the nearest core point.
      for (std::size_t k : deferred) {
        const std::size_t i = pending[k];
        double best = kInf;
        int label = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (core_labels[j] == 0) continue;
          double dist = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            const double diff = data(i, c) - data(j, c);
            dist += diff * diff;
          }
          if (dist < best) {
            best = dist;
            label = core_labels[j];
          }
        }
        res.labels[i] = label;
        res.trace.push_back({i, stage, label, -kInf});
      }
    }
    res.stages.push_back(res.labels);
  }
  return res;
}

}  // namespace densitree
