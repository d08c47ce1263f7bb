#pragma once

#include <vector>

#include "densitree/graph.hpp"
#include "densitree/kde.hpp"
#include "densitree/matrix.hpp"

// Plain single-threaded versions of the parallel kernels. They share no code
// with the optimized paths and exist for tests and benchmarks.
namespace densitree::reference {

std::vector<double> density(const Matrix& eval, const Matrix& data, KernelKind kernel, const Bandwidth& bw);

PairAmplitudes pair_amplitudes(const Matrix& data, KernelKind kernel, const Bandwidth& bw, int grid_pairs);

}  // namespace densitree::reference
