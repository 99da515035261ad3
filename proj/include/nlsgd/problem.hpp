#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "nlsgd/noise.hpp"
#include "nlsgd/nonlinearity.hpp"

namespace nlsgd {

using Matrix = Eigen::MatrixXd;

namespace problem {

// f(x) = 1/2 x'Ax + b'x with A symmetric positive definite.
struct Quadratic {
  Matrix A;
  Vector b;
};

// f(x) = sum_i w_i h(x_i - c_i) + rho/2 |x - c|^2 with h(u) = u^2 / (1 + u^2).
// Non-convex whenever rho < w_i / 2 for some i; the unique stationary point
// is x = c with f = 0.
struct SmoothNonconvex {
  Vector w;
  Vector c;
  double rho = 0.1;
};

using Variant = std::variant<Quadratic, SmoothNonconvex>;

}  // namespace problem

class Problem {
 public:
  explicit Problem(problem::Variant variant);

  std::size_t dim() const noexcept { return dim_; }
  const problem::Variant& variant() const noexcept { return variant_; }
  std::string name() const;

  double value(ConstVectorRef x) const;
  void grad(ConstVectorRef x, VectorRef out) const;
  Vector grad(ConstVectorRef x) const;
  /// grad(x) + z with z drawn from `noise`.
  void noisy_grad(ConstVectorRef x, const NoiseModel& noise, RngStream& rng, VectorRef out) const;

  /// f(x) - f*, computed directly from x - x* where possible.
  double gap(ConstVectorRef x) const;

  const std::optional<Vector>& x_star() const noexcept { return x_star_; }
  double f_star() const noexcept { return f_star_; }
  /// Strong-convexity modulus; empty for non-convex problems.
  std::optional<double> mu() const noexcept { return mu_; }
  double L() const noexcept { return L_; }

 private:
  void check_dim(Eigen::Index n) const;

  problem::Variant variant_;
  std::size_t dim_ = 0;
  std::optional<Vector> x_star_;
  double f_star_ = 0.0;
  std::optional<double> mu_;
  double L_ = 0.0;
};

/// Quadratic with eigenvalues log-spaced on [mu, L] under a random orthogonal
/// conjugation and b ~ N(0, I), all drawn from `seed`.
Problem make_quadratic(std::size_t d, double mu, double L, std::uint64_t seed);

/// SmoothNonconvex with w_i ~ U[1, 2], c ~ N(0, I) and rho = 0.1.
Problem make_smooth_nonconvex(std::size_t d, std::uint64_t seed);

}  // namespace nlsgd
