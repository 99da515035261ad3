#include <cmath>
#include <numbers>

#include "nlsgd/error.hpp"
#include "nlsgd/harness.hpp"

namespace nlsgd {

namespace {

constexpr std::uint64_t kMatrixStream = 0x70726f6a;  // "proj"
constexpr std::uint64_t kSampleStream = kMatrixStream + 1;
constexpr std::uint64_t kDirectionStream = kMatrixStream + 2;

}  // namespace

ProjectionResult projection_diagnostic(const VectorStream& stream, ConstVectorRef center, std::size_t n,
                                       std::uint64_t seed, std::size_t directions) {
  if (n < 100) throw InvalidArgument("projection_diagnostic: n must be >= 100");
  const Eigen::Index d = center.size();
  if (d < 1) throw InvalidArgument("projection_diagnostic: empty center");

  RngStream mrng(seed, kMatrixStream);
  Matrix P(2, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < 2; ++i) P(i, j) = mrng.normal();

  ProjectionResult out;
  out.points.resize(static_cast<Eigen::Index>(n), 2);
  RngStream srng(seed, kSampleStream);
  Vector v(d);
  double norm_sum = 0.0;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
    stream(srng, v);
    v -= center;
    const Eigen::Vector2d p = P * v;
    out.points.row(k) = p.transpose();
    norm_sum += p.norm();
  }
  const Eigen::Vector2d mean = out.points.colwise().mean().transpose();
  const double mean_norm = norm_sum / static_cast<double>(n);
  out.mean_ratio = mean_norm > 0.0 ? mean.norm() / mean_norm : 0.0;

  RngStream drng(seed, kDirectionStream);
  std::vector<double> a(n), b(n);
  for (std::size_t k = 0; k < directions; ++k) {
    const double theta = 2.0 * std::numbers::pi * drng.uniform();
    const double ux = std::cos(theta), uy = std::sin(theta);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      a[i] = ux * out.points(row, 0) + uy * out.points(row, 1);
      b[i] = -a[i];
    }
    out.ks.push_back(stats::ks_two_sample(a, b));
    out.directions.emplace_back(ux, uy);
  }
  return out;
}

ProjectionResult project(const ExperimentConfig& config) {
  const Problem problem = build_problem(config.problem);
  const NoiseModel noise = build_noise(config.noise, config.problem.dim);
  const auto d = static_cast<Eigen::Index>(config.problem.dim);
  if (config.project.stream == "noise") {
    return projection_diagnostic([&](RngStream& rng, VectorRef out) { noise.sample(rng, out); }, Vector::Zero(d),
                                 config.project.n, config.project.seed);
  }
  const Vector x = build_x1(config);
  const Vector g = problem.grad(x);
  return projection_diagnostic(
      [&](RngStream& rng, VectorRef out) {
        noise.sample(rng, out);
        out += g;
      },
      g, config.project.n, config.project.seed);
}

}  // namespace nlsgd
