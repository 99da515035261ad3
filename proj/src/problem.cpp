#include "nlsgd/problem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

#include "nlsgd/error.hpp"

namespace nlsgd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::uint64_t kProblemStream = 0x50524f42;  // "PROB"

}  // namespace

Problem::Problem(problem::Variant variant) : variant_(std::move(variant)) {
  std::visit(overloaded{
                 [this](problem::Quadratic& q) {
                   if (q.A.rows() == 0 || q.A.rows() != q.A.cols() || q.b.size() != q.A.rows())
                     throw InvalidArgument("Quadratic: A must be square and match b");
                   if (!q.A.allFinite() || !q.b.allFinite()) throw InvalidArgument("Quadratic: non-finite entries");
                   const double asym = (q.A - q.A.transpose()).cwiseAbs().maxCoeff();
                   if (asym > 1e-12 * std::max(1.0, q.A.cwiseAbs().maxCoeff()))
                     throw InvalidArgument("Quadratic: A must be symmetric");
                   q.A = 0.5 * (q.A + q.A.transpose());
                   Eigen::SelfAdjointEigenSolver<Matrix> eig(q.A, Eigen::EigenvaluesOnly);
                   const double lo = eig.eigenvalues().minCoeff();
                   if (!(lo > 0.0)) throw InvalidArgument("Quadratic: A must be positive definite");
                   dim_ = static_cast<std::size_t>(q.A.rows());
                   mu_ = lo;
                   L_ = eig.eigenvalues().maxCoeff();
                   Vector xs = -q.A.llt().solve(q.b);
                   f_star_ = 0.5 * q.b.dot(xs);
                   x_star_ = std::move(xs);
                 },
                 [this](problem::SmoothNonconvex& s) {
                   if (s.w.size() == 0 || s.w.size() != s.c.size())
                     throw InvalidArgument("SmoothNonconvex: w and c must have equal positive length");
                   if ((s.w.array() <= 0.0).any() || !(s.rho > 0.0))
                     throw InvalidArgument("SmoothNonconvex: weights and rho must be positive");
                   dim_ = static_cast<std::size_t>(s.w.size());
                   L_ = 2.0 * s.w.maxCoeff() + s.rho;
                   x_star_ = s.c;
                   f_star_ = 0.0;
                 },
             },
             variant_);
}

std::string Problem::name() const {
  return std::holds_alternative<problem::Quadratic>(variant_) ? "quadratic" : "smooth_nonconvex";
}

void Problem::check_dim(Eigen::Index n) const {
  if (static_cast<std::size_t>(n) != dim_)
    throw InvalidArgument("Problem: dimension mismatch (expected " + std::to_string(dim_) + ", got " +
                          std::to_string(n) + ")");
}

double Problem::value(ConstVectorRef x) const {
  check_dim(x.size());
  return std::visit(overloaded{
                        [&](const problem::Quadratic& q) { return 0.5 * x.dot(q.A * x) + q.b.dot(x); },
                        [&](const problem::SmoothNonconvex& s) {
                          const Vector u = x - s.c;
                          const auto u2 = u.array().square();
                          return (s.w.array() * u2 / (1.0 + u2)).sum() + 0.5 * s.rho * u.squaredNorm();
                        },
                    },
                    variant_);
}

void Problem::grad(ConstVectorRef x, VectorRef out) const {
  check_dim(x.size());
  check_dim(out.size());
  std::visit(overloaded{
                 [&](const problem::Quadratic& q) { out.noalias() = q.A * x + q.b; },
                 [&](const problem::SmoothNonconvex& s) {
                   for (Eigen::Index i = 0; i < x.size(); ++i) {
                     const double u = x[i] - s.c[i];
                     const double den = 1.0 + u * u;
                     out[i] = s.w[i] * 2.0 * u / (den * den) + s.rho * u;
                   }
                 },
             },
             variant_);
}

Vector Problem::grad(ConstVectorRef x) const {
  Vector out(static_cast<Eigen::Index>(dim_));
  grad(x, out);
  return out;
}

void Problem::noisy_grad(ConstVectorRef x, const NoiseModel& noise, RngStream& rng, VectorRef out) const {
  if (noise.dim() != dim_) throw InvalidArgument("noisy_grad: noise dimension mismatch");
  grad(x, out);
  Vector z(static_cast<Eigen::Index>(dim_));
  noise.sample(rng, z);
  out += z;
}

double Problem::gap(ConstVectorRef x) const {
  check_dim(x.size());
  if (const auto* q = std::get_if<problem::Quadratic>(&variant_)) {
    const Vector e = x - *x_star_;
    return 0.5 * e.dot(q->A * e);
  }
  return value(x) - f_star_;
}

Problem make_quadratic(std::size_t d, double mu, double L, std::uint64_t seed) {
  if (d == 0) throw InvalidArgument("make_quadratic: d must be positive");
  if (!(mu > 0.0) || !(L >= mu)) throw InvalidArgument("make_quadratic: need 0 < mu <= L");
  if (d == 1 && mu != L) throw InvalidArgument("make_quadratic: d = 1 requires mu = L");
  RngStream rng(seed, kProblemStream);
  const auto n = static_cast<Eigen::Index>(d);
  Vector eig(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    eig[i] = mu * std::pow(L / mu, s);
  }
  eig[0] = mu;
  eig[n - 1] = L;
  Matrix G(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  // Sign fix so Q is Haar-distributed.
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  Matrix A = Q * eig.asDiagonal() * Q.transpose();
  A = 0.5 * (A + A.transpose());
  Vector b(n);
  for (auto& bi : b) bi = rng.normal();
  return Problem(problem::Quadratic{std::move(A), std::move(b)});
}

Problem make_smooth_nonconvex(std::size_t d, std::uint64_t seed) {
  if (d == 0) throw InvalidArgument("make_smooth_nonconvex: d must be positive");
  RngStream rng(seed, kProblemStream + 1);
  const auto n = static_cast<Eigen::Index>(d);
  Vector w(n), c(n);
  for (auto& wi : w) wi = 1.0 + rng.uniform();
  for (auto& ci : c) ci = rng.normal();
  return Problem(problem::SmoothNonconvex{std::move(w), std::move(c), 0.1});
}

}  // namespace nlsgd
