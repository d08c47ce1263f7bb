#include "densitree/reference.hpp"

namespace densitree::reference {

std::vector<double> density(const Matrix& eval, const Matrix& data, KernelKind kernel, const Bandwidth& bw) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  std::vector<double> out(eval.rows(), 0.0);
  for (std::size_t k = 0; k < eval.rows(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto h = bw.row(i);
      double term = 1.0;
      for (std::size_t j = 0; j < d; ++j) term *= kernel_value(kernel, (eval(k, j) - data(i, j)) / h[j]) / h[j];
      sum += term;
    }
    out[k] = sum / static_cast<double>(n);
  }
  return out;
}

PairAmplitudes pair_amplitudes(const Matrix& data, KernelKind kernel, const Bandwidth& bw, int grid_pairs) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  PairAmplitudes amps(n, grid_pairs, kernel);
  Matrix pts(static_cast<std::size_t>(grid_pairs), d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (int k = 0; k < grid_pairs; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(grid_pairs - 1);
        for (std::size_t c = 0; c < d; ++c) pts(static_cast<std::size_t>(k), c) = data(i, c) + t * (data(j, c) - data(i, c));
      }
      const auto f = reference::density(pts, data, kernel, bw);
      amps.set(i, j, static_cast<float>(valley_amplitude(f)));
    }
  }
  return amps;
}

}  // namespace densitree::reference
