#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "nlsgd/nonlinearity.hpp"
#include "nlsgd/rng.hpp"
#include "nlsgd/stats.hpp"

namespace nlsgd {

class NoiseModel;
struct LogSquaredTable;

namespace noise {

// rho(z) = (alpha-1) / (2 (1+|z|)^alpha), i.i.d. coordinates.
struct PowerTail {
  double alpha = 3.0;
};

// rho(z) = 1 / (Z (z^2+1) log^2(|z|+2)), i.i.d. coordinates.
struct LogSquaredTail {
  std::shared_ptr<const LogSquaredTable> table;
};

struct CauchyIID {
  double x0 = 0.0;
  double gamma = 1.0;
};

// P(z) proportional to (1+|z|)^-alpha on R^d; requires alpha > d.
struct RadialPowerTail {
  double alpha = 3.0;
};

// (1 - lambda) P1 + lambda P2 with P1 symmetric.
struct Mixture {
  double lambda = 0.0;
  std::shared_ptr<const NoiseModel> symmetric;
  std::shared_ptr<const NoiseModel> nonsymmetric;
};

// base + offset * 1.
struct Shifted {
  std::shared_ptr<const NoiseModel> base;
  double offset = 0.0;
};

// z = 0 almost surely. Test double.
struct PointMass {};

using Variant = std::variant<PowerTail, LogSquaredTail, CauchyIID, RadialPowerTail, Mixture, Shifted, PointMass>;

}  // namespace noise

/// Scalar quantile of the PowerTail marginal.
double power_tail_quantile(double alpha, double u);
/// Scalar CDF of the PowerTail marginal.
double power_tail_cdf(double alpha, double z);
double cauchy_quantile(double x0, double gamma, double u);
double cauchy_cdf(double x0, double gamma, double z);

/// Normalizer Z of the log-squared kernel 1/((z^2+1) log^2(|z|+2)).
double log_squared_normalizer();

class NoiseModel {
 public:
  NoiseModel(noise::Variant variant, std::size_t dim);

  static NoiseModel power_tail(std::size_t dim, double alpha);
  static NoiseModel log_squared(std::size_t dim);
  static NoiseModel cauchy(std::size_t dim, double x0 = 0.0, double gamma = 1.0);
  static NoiseModel radial_power_tail(std::size_t dim, double alpha);
  static NoiseModel mixture(double lambda, NoiseModel symmetric, NoiseModel nonsymmetric);
  static NoiseModel shifted(NoiseModel base, double offset);
  static NoiseModel point_mass(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  const noise::Variant& variant() const noexcept { return variant_; }
  std::string name() const;

  void sample(RngStream& rng, VectorRef out) const;
  Vector sample(RngStream& rng) const;
  /// Like sample(); returns 1 when a mixture drew from its non-symmetric
  /// component and 0 otherwise.
  int sample_tagged(RngStream& rng, VectorRef out) const;

  /// Joint density P(z). Throws Unsupported for PointMass.
  double density(ConstVectorRef z) const;

  /// True when coordinates are i.i.d. so marginal_cdf describes each of them.
  bool has_marginal() const noexcept;
  double marginal_cdf(double z) const;
  /// P(|z| <= r) for RadialPowerTail.
  double radial_cdf(double r) const;

  bool is_symmetric() const noexcept;
  /// Radius B0 on which the density is certified positive.
  double positivity_radius() const;

 private:
  noise::Variant variant_;
  std::size_t dim_;
  double radial_log_norm_ = 0.0;
};

struct SelfTestOptions {
  double ks_alpha = 0.01;       // per-test p-value threshold
  bool bonferroni = true;       // divide ks_alpha by the number of KS tests
  double symmetry_sigmas = 4.0;  // pass if |mean sign| < sigmas / sqrt(n)
};

struct DistributionReport {
  std::vector<stats::KsResult> ks;  // one per coordinate, or one for the radius
  std::string ks_target;            // "marginal", "radius" or "none"
  double symmetry_statistic = 0.0;  // max over coordinates of |mean sign(z_i)|
  double symmetry_threshold = 0.0;
  double ks_threshold = 0.0;
  bool symmetry_checked = false;
  bool passed = true;
};

/// Draws n samples and tests them against the model's analytic CDF and, for
/// symmetric models, the sign-balance statistic.
DistributionReport self_test(const NoiseModel& model, std::size_t n, RngStream& rng,
                             const SelfTestOptions& options = {});

}  // namespace nlsgd
