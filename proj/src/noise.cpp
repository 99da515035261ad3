#include "nlsgd/noise.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "nlsgd/error.hpp"

namespace nlsgd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double log_squared_kernel(double z) {
  const double l = std::log(std::abs(z) + 2.0);
  return 1.0 / ((z * z + 1.0) * l * l);
}

double kernel_tail(double from) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([from](double s) { return log_squared_kernel(from + s); },
                              0.0, std::numeric_limits<double>::infinity());
}

}  // namespace

// Cumulative integral of the log-squared kernel on a log-spaced grid; queried
// by cubic Hermite interpolation with the exact kernel as derivative.
struct LogSquaredTable {
  static constexpr std::size_t kNodes = 2048;
  static constexpr double kZMin = 1e-4;
  static constexpr double kZMax = 1e8;

  std::vector<double> z;
  std::vector<double> cum;
  double tail_at_max = 0.0;
  double normalizer = 0.0;

  LogSquaredTable() {
    z.resize(kNodes);
    cum.resize(kNodes);
    z[0] = 0.0;
    const double lo = std::log(kZMin), hi = std::log(kZMax);
    for (std::size_t k = 1; k < kNodes; ++k)
      z[k] = std::exp(lo + (hi - lo) * static_cast<double>(k - 1) / static_cast<double>(kNodes - 2));
    cum[0] = 0.0;
    for (std::size_t k = 1; k < kNodes; ++k) {
      const double piece = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          log_squared_kernel, z[k - 1], z[k], 8, 1e-14);
      cum[k] = cum[k - 1] + piece;
    }
    tail_at_max = kernel_tail(kZMax);
    normalizer = 2.0 * (cum.back() + tail_at_max);
  }

  // Integral of the kernel over [0, x], x >= 0.
  double half_integral(double x) const {
    if (x >= kZMax) return cum.back() + tail_at_max - kernel_tail(x);
    const auto it = std::upper_bound(z.begin(), z.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - z.begin());
    const double x0 = z[k - 1], x1 = z[k];
    const double h = x1 - x0;
    const double s = (x - x0) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * cum[k - 1] + h10 * h * log_squared_kernel(x0) + h01 * cum[k] +
           h11 * h * log_squared_kernel(x1);
  }

  double cdf(double x) const {
    const double half = half_integral(std::abs(x)) / normalizer;
    return x >= 0 ? 0.5 + half : 0.5 - half;
  }

  static std::shared_ptr<const LogSquaredTable> shared() {
    static const auto table = std::make_shared<const LogSquaredTable>();
    return table;
  }
};

double power_tail_quantile(double alpha, double u) {
  if (!(u > 0.0 && u < 1.0)) throw InvalidArgument("power_tail_quantile: u must lie in (0,1)");
  const double v = 2.0 * std::min(u, 1.0 - u);
  const double mag = std::expm1(-std::log(v) / (alpha - 1.0));
  return u < 0.5 ? -mag : mag;
}

double power_tail_cdf(double alpha, double z) {
  const double tail = 0.5 * std::pow(1.0 + std::abs(z), 1.0 - alpha);
  return z >= 0 ? 1.0 - tail : tail;
}

double cauchy_quantile(double x0, double gamma, double u) {
  return x0 + gamma * std::tan(std::numbers::pi * (u - 0.5));
}

double cauchy_cdf(double x0, double gamma, double z) {
  return 0.5 + std::atan((z - x0) / gamma) / std::numbers::pi;
}

double log_squared_normalizer() { return LogSquaredTable::shared()->normalizer; }

NoiseModel::NoiseModel(noise::Variant variant, std::size_t dim) : variant_(std::move(variant)), dim_(dim) {
  if (dim_ == 0) throw InvalidArgument("NoiseModel: dimension must be positive");
  std::visit(overloaded{
                 [](const noise::PowerTail& p) {
                   if (!(p.alpha > 1.0) || !std::isfinite(p.alpha))
                     throw InvalidArgument("PowerTail: alpha must be > 1");
                 },
                 [](noise::LogSquaredTail& l) {
                   if (!l.table) l.table = LogSquaredTable::shared();
                 },
                 [](const noise::CauchyIID& c) {
                   if (!(c.gamma > 0.0) || !std::isfinite(c.x0))
                     throw InvalidArgument("Cauchy: scale must be positive and location finite");
                 },
                 [this](const noise::RadialPowerTail& r) {
                   const auto d = static_cast<double>(dim_);
                   if (!(r.alpha > d) || !std::isfinite(r.alpha))
                     throw InvalidArgument("RadialPowerTail: alpha must exceed the dimension for a normalizable law");
                   const double log_sphere = std::log(2.0) + 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d);
                   const double log_beta = std::lgamma(d) + std::lgamma(r.alpha - d) - std::lgamma(r.alpha);
                   radial_log_norm_ = log_sphere + log_beta;
                 },
                 [this](const noise::Mixture& m) {
                   if (!(m.lambda >= 0.0 && m.lambda < 1.0))
                     throw InvalidArgument("Mixture: lambda must lie in [0,1)");
                   if (!m.symmetric || !m.nonsymmetric) throw InvalidArgument("Mixture: missing component");
                   if (m.symmetric->dim() != dim_ || m.nonsymmetric->dim() != dim_)
                     throw InvalidArgument("Mixture: component dimensions differ");
                   if (!m.symmetric->is_symmetric())
                     throw InvalidArgument("Mixture: first component must be symmetric");
                 },
                 [this](const noise::Shifted& s) {
                   if (!s.base) throw InvalidArgument("Shifted: missing base model");
                   if (s.base->dim() != dim_) throw InvalidArgument("Shifted: dimension mismatch");
                   if (!std::isfinite(s.offset)) throw InvalidArgument("Shifted: offset must be finite");
                 },
                 [](const noise::PointMass&) {},
             },
             variant_);
}

NoiseModel NoiseModel::power_tail(std::size_t dim, double alpha) { return {noise::PowerTail{alpha}, dim}; }
NoiseModel NoiseModel::log_squared(std::size_t dim) { return {noise::LogSquaredTail{}, dim}; }
NoiseModel NoiseModel::cauchy(std::size_t dim, double x0, double gamma) { return {noise::CauchyIID{x0, gamma}, dim}; }
NoiseModel NoiseModel::radial_power_tail(std::size_t dim, double alpha) {
  return {noise::RadialPowerTail{alpha}, dim};
}
NoiseModel NoiseModel::mixture(double lambda, NoiseModel symmetric, NoiseModel nonsymmetric) {
  const std::size_t d = symmetric.dim();
  return {noise::Mixture{lambda, std::make_shared<const NoiseModel>(std::move(symmetric)),
                         std::make_shared<const NoiseModel>(std::move(nonsymmetric))},
          d};
}
NoiseModel NoiseModel::shifted(NoiseModel base, double offset) {
  const std::size_t d = base.dim();
  return {noise::Shifted{std::make_shared<const NoiseModel>(std::move(base)), offset}, d};
}
NoiseModel NoiseModel::point_mass(std::size_t dim) { return {noise::PointMass{}, dim}; }

std::string NoiseModel::name() const {
  using stats::format_double;
  return std::visit(overloaded{
                        [](const noise::PowerTail& p) { return "power_tail(alpha=" + format_double(p.alpha) + ")"; },
                        [](const noise::LogSquaredTail&) -> std::string { return "log_squared"; },
                        [](const noise::CauchyIID& c) {
                          return "cauchy(x0=" + format_double(c.x0) + ",gamma=" + format_double(c.gamma) + ")";
                        },
                        [](const noise::RadialPowerTail& r) {
                          return "radial_power_tail(alpha=" + format_double(r.alpha) + ")";
                        },
                        [](const noise::Mixture& m) {
                          return "mixture(lambda=" + format_double(m.lambda) + "," + m.symmetric->name() + "," +
                                 m.nonsymmetric->name() + ")";
                        },
                        [](const noise::Shifted& s) {
                          return "shifted(" + s.base->name() + ",offset=" + format_double(s.offset) + ")";
                        },
                        [](const noise::PointMass&) -> std::string { return "point_mass"; },
                    },
                    variant_);
}

int NoiseModel::sample_tagged(RngStream& rng, VectorRef out) const {
  if (static_cast<std::size_t>(out.size()) != dim_) throw InvalidArgument("sample: dimension mismatch");
  return std::visit(overloaded{
                        [&](const noise::PowerTail& p) {
                          const double inv = 1.0 / (p.alpha - 1.0);
                          for (auto& zi : out) {
                            const double u = rng.uniform();
                            const double v = 2.0 * std::min(u, 1.0 - u);
                            const double mag = std::expm1(-std::log(v) * inv);
                            zi = u < 0.5 ? -mag : mag;
                          }
                          return 0;
                        },
                        [&](const noise::LogSquaredTail&) {
                          const double floor = std::log(2.0) * std::log(2.0);
                          for (auto& zi : out) {
                            for (;;) {
                              const double z = std::tan(std::numbers::pi * (rng.uniform() - 0.5));
                              const double l = std::log(std::abs(z) + 2.0);
                              const double accept = floor / (l * l);
                              if (accept > 1.0 + 1e-12) throw NumericError("log-squared sampler: envelope exceeded");
                              if (rng.uniform() < accept) {
                                zi = z;
                                break;
                              }
                            }
                          }
                          return 0;
                        },
                        [&](const noise::CauchyIID& c) {
                          for (auto& zi : out) zi = cauchy_quantile(c.x0, c.gamma, rng.uniform());
                          return 0;
                        },
                        [&](const noise::RadialPowerTail& r) {
                          const auto d = static_cast<double>(dim_);
                          const double s = boost::math::ibeta_inv(d, r.alpha - d, rng.uniform());
                          const double radius = s / (1.0 - s);
                          double norm2 = 0.0;
                          do {
                            for (auto& zi : out) zi = rng.normal();
                            norm2 = out.squaredNorm();
                          } while (norm2 == 0.0);
                          out *= radius / std::sqrt(norm2);
                          return 0;
                        },
                        [&](const noise::Mixture& m) {
                          if (rng.bernoulli(m.lambda)) {
                            m.nonsymmetric->sample(rng, out);
                            return 1;
                          }
                          m.symmetric->sample(rng, out);
                          return 0;
                        },
                        [&](const noise::Shifted& s) {
                          const int tag = s.base->sample_tagged(rng, out);
                          out.array() += s.offset;
                          return tag;
                        },
                        [&](const noise::PointMass&) {
                          out.setZero();
                          return 0;
                        },
                    },
                    variant_);
}

void NoiseModel::sample(RngStream& rng, VectorRef out) const { sample_tagged(rng, out); }

Vector NoiseModel::sample(RngStream& rng) const {
  Vector out(static_cast<Eigen::Index>(dim_));
  sample_tagged(rng, out);
  return out;
}

double NoiseModel::density(ConstVectorRef z) const {
  if (static_cast<std::size_t>(z.size()) != dim_) throw InvalidArgument("density: dimension mismatch");
  return std::visit(overloaded{
                        [&](const noise::PowerTail& p) {
                          double out = 1.0;
                          for (double zi : z) out *= 0.5 * (p.alpha - 1.0) * std::pow(1.0 + std::abs(zi), -p.alpha);
                          return out;
                        },
                        [&](const noise::LogSquaredTail& l) {
                          double out = 1.0;
                          for (double zi : z) out *= log_squared_kernel(zi) / l.table->normalizer;
                          return out;
                        },
                        [&](const noise::CauchyIID& c) {
                          double out = 1.0;
                          for (double zi : z) {
                            const double u = (zi - c.x0) / c.gamma;
                            out *= 1.0 / (std::numbers::pi * c.gamma * (1.0 + u * u));
                          }
                          return out;
                        },
                        [&](const noise::RadialPowerTail& r) {
                          return std::exp(-r.alpha * std::log1p(z.norm()) - radial_log_norm_);
                        },
                        [&](const noise::Mixture& m) {
                          return (1.0 - m.lambda) * m.symmetric->density(z) + m.lambda * m.nonsymmetric->density(z);
                        },
                        [&](const noise::Shifted& s) {
                          return s.base->density(z.array() - s.offset);
                        },
                        [](const noise::PointMass&) -> double {
                          throw Unsupported("density: point mass has no density");
                        },
                    },
                    variant_);
}

bool NoiseModel::has_marginal() const noexcept {
  return std::visit(overloaded{
                        [](const noise::RadialPowerTail&) { return false; },
                        [](const noise::Mixture& m) {
                          return m.symmetric->has_marginal() && m.nonsymmetric->has_marginal();
                        },
                        [](const noise::Shifted& s) { return s.base->has_marginal(); },
                        [](const auto&) { return true; },
                    },
                    variant_);
}

double NoiseModel::marginal_cdf(double z) const {
  return std::visit(overloaded{
                        [z](const noise::PowerTail& p) { return power_tail_cdf(p.alpha, z); },
                        [z](const noise::LogSquaredTail& l) { return l.table->cdf(z); },
                        [z](const noise::CauchyIID& c) { return cauchy_cdf(c.x0, c.gamma, z); },
                        [](const noise::RadialPowerTail&) -> double {
                          throw Unsupported("marginal_cdf: radial coordinates are not independent");
                        },
                        [z](const noise::Mixture& m) {
                          return (1.0 - m.lambda) * m.symmetric->marginal_cdf(z) +
                                 m.lambda * m.nonsymmetric->marginal_cdf(z);
                        },
                        [z](const noise::Shifted& s) { return s.base->marginal_cdf(z - s.offset); },
                        [z](const noise::PointMass&) { return z >= 0.0 ? 1.0 : 0.0; },
                    },
                    variant_);
}

double NoiseModel::radial_cdf(double r) const {
  const auto* radial = std::get_if<noise::RadialPowerTail>(&variant_);
  if (!radial) throw Unsupported("radial_cdf: only defined for the radial power-tail model");
  if (r <= 0.0) return 0.0;
  if (!std::isfinite(r)) return 1.0;
  const auto d = static_cast<double>(dim_);
  return boost::math::ibeta(d, radial->alpha - d, r / (1.0 + r));
}

bool NoiseModel::is_symmetric() const noexcept {
  return std::visit(overloaded{
                        [](const noise::CauchyIID& c) { return c.x0 == 0.0; },
                        [](const noise::Mixture& m) { return m.lambda == 0.0 || m.nonsymmetric->is_symmetric(); },
                        [](const noise::Shifted& s) { return s.offset == 0.0 && s.base->is_symmetric(); },
                        [](const auto&) { return true; },
                    },
                    variant_);
}

double NoiseModel::positivity_radius() const {
  if (std::holds_alternative<noise::Mixture>(variant_))
    throw Unsupported("positivity_radius: defined for the symmetric component of a mixture only");
  if (std::holds_alternative<noise::PointMass>(variant_))
    throw Unsupported("positivity_radius: point mass has no density");
  if (!is_symmetric()) throw Unsupported("positivity_radius: model is not symmetric");
  constexpr double radius = 1.0;
  constexpr int steps = 16;
  const auto n = static_cast<Eigen::Index>(dim_);
  const Vector axis = Vector::Unit(n, 0);
  const Vector diagonal = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(dim_)));
  for (int k = 0; k <= steps; ++k) {
    const double r = radius * k / steps;
    for (const Vector* dir : {&axis, &diagonal})
      for (double sgn : {1.0, -1.0})
        if (!(density(sgn * r * *dir) > 0.0))
          throw NumericError("positivity_radius: density vanishes inside the unit ball");
  }
  return radius;
}

DistributionReport self_test(const NoiseModel& model, std::size_t n, RngStream& rng, const SelfTestOptions& options) {
  if (n < 1000) throw InvalidArgument("self_test: n must be >= 1000");
  const std::size_t d = model.dim();
  std::vector<std::vector<double>> coords(d, std::vector<double>(n));
  std::vector<double> radii;
  const bool radial = std::holds_alternative<noise::RadialPowerTail>(model.variant());
  if (radial) radii.resize(n);
  Vector z(static_cast<Eigen::Index>(d));
  for (std::size_t s = 0; s < n; ++s) {
    model.sample(rng, z);
    for (std::size_t i = 0; i < d; ++i) coords[i][s] = z[static_cast<Eigen::Index>(i)];
    if (radial) radii[s] = z.norm();
  }

  DistributionReport report;
  const auto nn = static_cast<double>(n);
  if (model.is_symmetric()) {
    report.symmetry_checked = true;
    report.symmetry_threshold = options.symmetry_sigmas / std::sqrt(nn);
    for (const auto& c : coords) {
      double acc = 0.0;
      for (double v : c) acc += (v > 0) - (v < 0);
      report.symmetry_statistic = std::max(report.symmetry_statistic, std::abs(acc / nn));
    }
    if (!(report.symmetry_statistic < report.symmetry_threshold)) report.passed = false;
  }

  if (model.has_marginal() && !std::holds_alternative<noise::PointMass>(model.variant())) {
    report.ks_target = "marginal";
    for (auto& c : coords) report.ks.push_back(stats::ks_one_sample(c, [&](double x) { return model.marginal_cdf(x); }));
  } else if (radial) {
    report.ks_target = "radius";
    report.ks.push_back(stats::ks_one_sample(radii, [&](double r) { return model.radial_cdf(r); }));
  } else {
    report.ks_target = "none";
  }
  report.ks_threshold = options.ks_alpha;
  if (options.bonferroni && report.ks.size() > 1) report.ks_threshold /= static_cast<double>(report.ks.size());
  for (const auto& k : report.ks)
    if (!(k.p_value > report.ks_threshold)) report.passed = false;
  return report;
}

}  // namespace nlsgd
