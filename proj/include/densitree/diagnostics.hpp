#pragma once

#include <optional>
#include <span>
#include <vector>

#include "densitree/kde.hpp"
#include "densitree/matrix.hpp"

namespace densitree {

struct DbsResult {
  std::vector<double> values;  // in [-1, 1]
  std::vector<double> priors;  // normalized, one per class
  bool priors_rescaled = false;  // the given priors did not sum to 1
};

/// Density-based silhouette of a partition with labels 1..M. Class densities
/// use fixed per-class h_norm * hmult bandwidths (the global h_norm * hmult
/// for classes too small or flat to have their own). Default priors are
/// proportional to the class sizes.
DbsResult dbs(const Matrix& data, std::span<const int> labels, std::optional<std::vector<double>> priors,
              KernelKind kernel, double hmult);

/// Adjusted Rand index between two labelings of the same points.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace densitree
