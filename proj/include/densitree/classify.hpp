#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "densitree/kde.hpp"
#include "densitree/levelset.hpp"
#include "densitree/matrix.hpp"

namespace densitree {

struct ClassifyConfig {
  int n_stage = 5;
  bool se = true;
  // Reuse `global_h` for every group instead of per-group h_norm * hmult.
  bool hcores = true;
  double hmult = 0.75;
  KernelKind kernel = KernelKind::Gaussian;
  std::vector<double> global_h;
};

struct RatioScore {
  int label = 0;      // 1-based argmax, 0 when every density is zero
  int runner_up = 0;  // 1-based argmax over the other groups
  double r = 0.0;     // log(f_label / f_runner_up); +inf when the runner-up is zero
};

/// Ties go to the smaller label.
RatioScore log_ratio(std::span<const double> group_densities);

/// Delta-method variance of log f_m(x): R(K)^d / (n_m prod_j h_mj f_m(x)).
/// +inf when f is zero.
double log_density_variance(KernelKind kernel, std::size_t d, std::size_t n_m, double h_prod, double f);

/// r / sqrt(var_a + var_b); +inf when r is +inf.
double se_weighted_ratio(double r, double var_a, double var_b);

/// h_norm(members) * hmult, or `fallback` when the group has fewer than two
/// members or a constant coordinate.
std::vector<double> group_bandwidth(const Matrix& members, double hmult, const std::vector<double>& fallback);

struct StageRecord {
  std::size_t index;
  int stage;  // 1-based
  int label;
  double score;
};

struct ClassifyResult {
  std::vector<int> labels;
  std::vector<std::vector<int>> stages;  // label vector after each stage
  std::vector<StageRecord> trace;        // allocation order
};

/// Block-sequential allocation of the points outside the cores. With
/// n_stage = 0 the core labels are returned unchanged.
ClassifyResult classify(const Matrix& data, const CoreAssignment& cores, const ClassifyConfig& cfg);

}  // namespace densitree
