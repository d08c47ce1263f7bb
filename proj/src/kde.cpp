#include "densitree/kde.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "densitree/error.hpp"

namespace densitree {

std::string_view to_string(KernelKind kind) {
  return kind == KernelKind::Gaussian ? "gaussian" : "t7";
}

KernelKind parse_kernel(std::string_view name) {
  if (name == "gaussian") return KernelKind::Gaussian;
  if (name == "t7") return KernelKind::StudentT7;
  throw InputError("unknown kernel '" + std::string(name) + "' (expected gaussian or t7)");
}

double t7_constant() {
  static const double c = std::tgamma(4.0) / (std::tgamma(3.5) * std::sqrt(7.0 * std::numbers::pi));
  return c;
}

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double t7_core(double u) {
  const double b = 1.0 + u * u / 7.0;
  const double b2 = b * b;
  return 1.0 / (b2 * b2);
}

}  // namespace

double kernel_value(KernelKind kind, double u) {
  if (kind == KernelKind::Gaussian) return kInvSqrt2Pi * std::exp(-0.5 * u * u);
  return t7_constant() * t7_core(u);
}

double kernel_roughness(KernelKind kind) {
  if (kind == KernelKind::Gaussian) return 0.5 / std::sqrt(std::numbers::pi);
  // c^2 * integral (1 + u^2/7)^-8 du = c^2 sqrt(7) B(1/2, 15/2)
  static const double r = [] {
    const double c = t7_constant();
    const double beta = std::tgamma(0.5) * std::tgamma(7.5) / std::tgamma(8.0);
    return c * c * std::sqrt(7.0) * beta;
  }();
  return r;
}

Bandwidth Bandwidth::fixed(std::vector<double> h) {
  for (double v : h) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("bandwidth entries must be positive and finite");
  }
  Bandwidth bw;
  bw.fixed_ = true;
  bw.h_ = std::move(h);
  return bw;
}

Bandwidth Bandwidth::adaptive(Matrix h) {
  for (double v : h.values()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("bandwidth entries must be positive and finite");
  }
  Bandwidth bw;
  bw.fixed_ = false;
  bw.per_obs_ = std::move(h);
  return bw;
}

const std::vector<double>& Bandwidth::fixed_h() const {
  if (!fixed_) throw InvariantError("fixed_h() called on an adaptive bandwidth");
  return h_;
}

const Matrix& Bandwidth::adaptive_h() const {
  if (fixed_) throw InvariantError("adaptive_h() called on a fixed bandwidth");
  return per_obs_;
}

Bandwidth Bandwidth::scaled(double factor) const {
  if (fixed_) {
    auto h = h_;
    for (double& v : h) v *= factor;
    return fixed(std::move(h));
  }
  auto values = per_obs_.values();
  for (double& v : values) v *= factor;
  return adaptive(Matrix(per_obs_.rows(), per_obs_.cols(), std::move(values)));
}

std::vector<double> h_norm(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n < 2) throw DegenerateError("h_norm needs at least 2 observations");
  const auto sd = column_sd(data);
  const double factor =
      std::pow(4.0 / ((static_cast<double>(d) + 2.0) * static_cast<double>(n)), 1.0 / (static_cast<double>(d) + 4.0));
  std::vector<double> h(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (!(sd[j] > 0.0)) {
      throw DegenerateError("coordinate " + std::to_string(j + 1) + " has zero variance");
    }
    h[j] = sd[j] * factor;
  }
  return h;
}

namespace detail {

KernelSum::KernelSum(const Matrix& data, KernelKind kernel, const Bandwidth& bw)
    : kernel_(kernel), n_(data.rows()), d_(data.cols()), data_(&data), fixed_(bw.is_fixed()) {
  if (bw.dim() != d_) throw InputError("bandwidth dimension does not match the data");
  if (!fixed_ && bw.adaptive_h().rows() != n_) {
    throw InputError("adaptive bandwidth needs one row per observation");
  }
  const double unit = kernel == KernelKind::Gaussian ? kInvSqrt2Pi : t7_constant();
  const double kconst = std::pow(unit, static_cast<double>(d_));
  const std::size_t rows = fixed_ ? 1 : n_;
  inv_h_.resize(rows * d_);
  norm_.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    auto h = bw.row(i);
    double prod = static_cast<double>(n_);
    for (std::size_t j = 0; j < d_; ++j) {
      prod *= h[j];
      inv_h_[i * d_ + j] = 1.0 / h[j];
    }
    norm_[i] = kconst / prod;
  }
}

double KernelSum::operator()(std::span<const double> y) const noexcept {
  const double* x = data_->values().data();
  double sum = 0.0;
  if (kernel_ == KernelKind::Gaussian) {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t b = fixed_ ? 0 : i;
      const double* ih = inv_h_.data() + b * d_;
      const double* xi = x + i * d_;
      double q = 0.0;
      for (std::size_t j = 0; j < d_; ++j) {
        const double u = (y[j] - xi[j]) * ih[j];
        q += u * u;
      }
      sum += norm_[b] * std::exp(-0.5 * q);
    }
  } else {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t b = fixed_ ? 0 : i;
      const double* ih = inv_h_.data() + b * d_;
      const double* xi = x + i * d_;
      double prod = 1.0;
      for (std::size_t j = 0; j < d_; ++j) {
        const double u = (y[j] - xi[j]) * ih[j];
        prod *= t7_core(u);
      }
      sum += norm_[b] * prod;
    }
  }
  return sum;
}

}  // namespace detail

std::vector<double> density(const Matrix& eval, const Matrix& data, KernelKind kernel,
                            const Bandwidth& bw) {
  if (eval.cols() != data.cols()) throw InputError("evaluation points and data differ in dimension");
  if (data.rows() == 0) throw InputError("density estimate needs at least one observation");
  const detail::KernelSum ksum(data, kernel, bw);
  const auto m = static_cast<std::ptrdiff_t>(eval.rows());
  std::vector<double> out(eval.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    out[static_cast<std::size_t>(k)] = ksum(eval.row(static_cast<std::size_t>(k)));
  }
  return out;
}

DensityEstimate kepdf(const Matrix& eval, const Matrix& data, KernelKind kernel, const Bandwidth& bw) {
  DensityEstimate est{eval, density(eval, data, kernel, bw), kernel, bw};
  return est;
}

Matrix hprop2f(const Matrix& data, std::optional<std::vector<double>> pilot_h) {
  const std::vector<double> h = pilot_h ? *pilot_h : h_norm(data);
  if (h.size() != data.cols()) throw InputError("pilot bandwidth dimension does not match the data");
  const auto pilot = density(data, data, KernelKind::Gaussian, Bandwidth::fixed(h));
  double log_sum = 0.0;
  for (std::size_t i = 0; i < pilot.size(); ++i) {
    if (!(pilot[i] > 0.0)) {
      throw DegenerateError("pilot density is zero at observation " + std::to_string(i + 1));
    }
    log_sum += std::log(pilot[i]);
  }
  const double g = std::exp(log_sum / static_cast<double>(pilot.size()));
  Matrix out(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double lambda = std::pow(pilot[i] / g, -0.5);
    for (std::size_t j = 0; j < data.cols(); ++j) out(i, j) = h[j] * lambda;
  }
  return out;
}

std::vector<double> eval_segment(std::span<const double> a, std::span<const double> b, int npts,
                                 const Matrix& data, KernelKind kernel, const Bandwidth& bw) {
  if (npts < 2) throw InputError("segment evaluation needs at least 2 points");
  if (a.size() != data.cols() || b.size() != data.cols()) {
    throw InputError("segment endpoints differ in dimension from the data");
  }
  const detail::KernelSum ksum(data, kernel, bw);
  std::vector<double> out(static_cast<std::size_t>(npts));
  std::vector<double> y(a.size());
  for (int k = 0; k < npts; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(npts - 1);
    for (std::size_t j = 0; j < a.size(); ++j) y[j] = a[j] + t * (b[j] - a[j]);
    out[static_cast<std::size_t>(k)] = ksum(y);
  }
  return out;
}

}  // namespace densitree
