#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "densitree/matrix.hpp"

namespace densitree {

enum class KernelKind { Gaussian, StudentT7 };

std::string_view to_string(KernelKind kind);
/// Accepts "gaussian" or "t7".
KernelKind parse_kernel(std::string_view name);

/// Normalizing constant of the t density with 7 degrees of freedom,
/// Gamma(4) / (Gamma(7/2) sqrt(7 pi)).
double t7_constant();

/// Univariate kernel K(u).
double kernel_value(KernelKind kind, double u);

/// Roughness R(K) = integral of K(u)^2 du.
double kernel_roughness(KernelKind kind);

/// Smoothing parameters of a product-kernel estimator: either one vector
/// shared by all observations, or one vector per observation.
class Bandwidth {
 public:
  static Bandwidth fixed(std::vector<double> h);
  static Bandwidth adaptive(Matrix h);

  bool is_fixed() const noexcept { return fixed_; }
  std::size_t dim() const noexcept { return fixed_ ? h_.size() : per_obs_.cols(); }

  /// Bandwidth vector of observation i (the shared vector when fixed).
  std::span<const double> row(std::size_t i) const noexcept {
    return fixed_ ? std::span<const double>(h_) : per_obs_.row(i);
  }

  const std::vector<double>& fixed_h() const;
  const Matrix& adaptive_h() const;

  Bandwidth scaled(double factor) const;

 private:
  Bandwidth() = default;
  bool fixed_ = true;
  std::vector<double> h_;
  Matrix per_obs_;
};

struct DensityEstimate {
  Matrix eval_points;
  std::vector<double> values;
  KernelKind kernel = KernelKind::Gaussian;
  Bandwidth bandwidth = Bandwidth::fixed({1.0});
};

/// Normal-reference bandwidth: s_j (4 / ((d+2) n))^(1/(d+4)).
/// Throws DegenerateError for a zero-variance coordinate.
std::vector<double> h_norm(const Matrix& data);

/// Adaptive bandwidths with sensitivity 1/2 around a Gaussian pilot estimate.
/// Row i is pilot_h scaled by (f(x_i) / g)^(-1/2), g the geometric mean of the
/// pilot densities.
Matrix hprop2f(const Matrix& data, std::optional<std::vector<double>> pilot_h = std::nullopt);

/// Product-kernel estimate at every row of `eval`. Each point's sum runs over
/// observations in ascending index order, so values do not depend on the
/// thread count.
std::vector<double> density(const Matrix& eval, const Matrix& data, KernelKind kernel,
                            const Bandwidth& bw);

DensityEstimate kepdf(const Matrix& eval, const Matrix& data, KernelKind kernel,
                      const Bandwidth& bw);

/// Densities at a + t (b - a) for t = k / (npts - 1), k = 0..npts-1.
std::vector<double> eval_segment(std::span<const double> a, std::span<const double> b, int npts,
                                 const Matrix& data, KernelKind kernel, const Bandwidth& bw);

namespace detail {

// Precomputed per-observation factors shared by the density kernels.
class KernelSum {
 public:
  KernelSum(const Matrix& data, KernelKind kernel, const Bandwidth& bw);

  double operator()(std::span<const double> y) const noexcept;

  std::size_t dim() const noexcept { return d_; }

 private:
  KernelKind kernel_;
  std::size_t n_;
  std::size_t d_;
  const Matrix* data_;
  std::vector<double> inv_h_;  // n x d, or 1 x d when fixed
  std::vector<double> norm_;   // n (or 1): kernel constant / (n prod_j h_ij)
  bool fixed_;
};

}  // namespace detail

}  // namespace densitree
