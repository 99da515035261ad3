#include <cmath>

#include "doctest.h"
#include "nlsgd/error.hpp"
#include "nlsgd/optimizer.hpp"

using namespace nlsgd;

namespace {

const NoiseModel& zero_noise(std::size_t d) {
  static std::map<std::size_t, NoiseModel> cache;
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, NoiseModel::point_mass(d)).first;
  return it->second;
}

}  // namespace

TEST_CASE("step schedule") {
  const StepSchedule s{2.0, 0.5};
  CHECK(s(3) == doctest::Approx(1.0));
  CHECK_THROWS_AS((StepSchedule{0.0, 0.5}).validate(), InvalidArgument);
  CHECK_THROWS_AS((StepSchedule{1.0, 1.5}).validate(), InvalidArgument);
}

TEST_CASE("fixed point under zero noise") {
  const Problem p(problem::Quadratic{Matrix::Identity(3, 3), Vector::Zero(3)});
  const auto psi = NonlinearMap::sign(3);
  RunConfig rc;
  rc.problem = &p;
  rc.nonlinearity = &psi;
  rc.noise = &zero_noise(3);
  rc.schedule = {1.0, 0.75};
  rc.x1 = Vector::Zero(3);
  rc.T = 100;
  rc.record.iterates = true;
  const auto tr = run(rc);
  for (const auto& x : tr.iterates) CHECK(x.norm() == 0.0);
  for (double v : tr.at("dist2")) CHECK(v == 0.0);
  CHECK(tr.t.front() == 1);
  CHECK(tr.t.back() == 101);
}

TEST_CASE("sign steps have norm alpha_t sqrt(nonzero)") {
  const Problem p = make_quadratic(4, 1.0, 3.0, 2);
  const auto psi = NonlinearMap::sign(4);
  const auto noise = NoiseModel::power_tail(4, 2.5);
  RunConfig rc;
  rc.problem = &p;
  rc.nonlinearity = &psi;
  rc.noise = &noise;
  rc.schedule = {0.7, 0.75};
  rc.x1 = Vector::Ones(4);
  rc.T = 200;
  rc.record.iterates = true;
  const auto tr = run(rc);
  for (std::size_t k = 0; k + 1 < tr.iterates.size(); ++k) {
    const double step = (tr.iterates[k + 1] - tr.iterates[k]).norm();
    CHECK(step == doctest::Approx(rc.schedule(k + 1) * 2.0).epsilon(1e-12));
  }
}

TEST_CASE("sign sgd reduces the distance to the minimizer") {
  const Problem p = make_quadratic(2, 1.0, 2.0, 13);
  const auto psi = NonlinearMap::sign(2);
  const auto noise = NoiseModel::power_tail(2, 3.0);
  RunConfig rc;
  rc.problem = &p;
  rc.nonlinearity = &psi;
  rc.noise = &noise;
  rc.schedule = {1.0, 0.75};
  rc.x1 = *p.x_star() + Vector::Constant(2, 3.0);
  rc.T = 10000;
  rc.seed = 99;
  const auto tr = run(rc);
  const auto& d2 = tr.at("dist2");
  CHECK(d2.back() < d2.front());
  CHECK(d2.back() < 0.05);
}

TEST_CASE("weighted average weights") {
  const Problem p(problem::Quadratic{Matrix::Identity(3, 3), Vector::Zero(3)});
  const auto psi = NonlinearMap::sign(3);
  Trajectory tr;
  tr.stride = 1;
  tr.t = {1, 2, 3};
  tr.iterates = {Vector::Unit(3, 0), Vector::Unit(3, 1), Vector::Unit(3, 2)};
  const StepSchedule s{1.0, 0.75};
  const Vector avg = weighted_average(tr, s, 3);
  double w[3], total = 0.0;
  for (int k = 0; k < 3; ++k) total += (w[k] = std::pow(k + 2.0, -0.75));
  for (int k = 0; k < 3; ++k) CHECK(avg[k] == doctest::Approx(w[k] / total).epsilon(1e-14));
  CHECK((weighted_average(tr, s, 1) - Vector::Unit(3, 0)).norm() == 0.0);

  Trajectory constant = tr;
  constant.iterates.assign(3, Vector::Constant(3, 2.5));
  CHECK((weighted_average(constant, s, 3) - Vector::Constant(3, 2.5)).norm() < 1e-14);
  Trajectory empty;
  CHECK_THROWS_AS(weighted_average(empty, s, 1), InvalidArgument);
}

TEST_CASE("recorded weighted average matches the recomputed one") {
  const Problem p = make_quadratic(3, 1.0, 2.0, 4);
  const auto psi = NonlinearMap::comp_clip(3, 1.0);
  const auto noise = NoiseModel::cauchy(3);
  RunConfig rc;
  rc.problem = &p;
  rc.nonlinearity = &psi;
  rc.noise = &noise;
  rc.schedule = {0.5, 0.8};
  rc.x1 = Vector::Zero(3);
  rc.T = 500;
  rc.record.iterates = true;
  rc.record.wavg_dist2 = true;
  const auto tr = run(rc);
  const Vector avg = weighted_average(tr, rc.schedule, rc.T + 1);
  CHECK((avg - tr.weighted_average).norm() < 1e-12);
  CHECK(tr.at("wavg_dist2").back() == doctest::Approx((avg - *p.x_star()).squaredNorm()).epsilon(1e-10));
}

TEST_CASE("stride keeps the last index") {
  const Problem p = make_quadratic(2, 1.0, 2.0, 4);
  const auto psi = NonlinearMap::sign(2);
  const auto noise = NoiseModel::power_tail(2, 3.0);
  RunConfig rc;
  rc.problem = &p;
  rc.nonlinearity = &psi;
  rc.noise = &noise;
  rc.x1 = Vector::Zero(2);
  rc.T = 25;
  rc.record.stride = 10;
  const auto tr = run(rc);
  CHECK(tr.t == std::vector<std::uint64_t>{1, 11, 21, 26});
}

TEST_CASE("overflow aborts with the offending index") {
  const Problem p(problem::Quadratic{10.0 * Matrix::Identity(1, 1), Vector::Zero(1)});
  const auto psi = NonlinearMap::joint_clip(1, 1.0);
  RunConfig rc;
  rc.problem = &p;
  rc.nonlinearity = &psi;
  rc.noise = &zero_noise(1);
  rc.schedule = {1.0, 1.0};
  rc.x1 = Vector::Constant(1, 1e308);
  rc.T = 10;
  const auto tr = run(rc);
  CHECK(tr.aborted);
  CHECK(tr.abort_t == 2);
}

TEST_CASE("effective noise for sign at x = 1") {
  const auto psi = NonlinearMap::sign(1);
  const auto noise = NoiseModel::power_tail(1, 3.0);
  RngStream rng(4, 0);
  const auto e = effective_noise(psi, noise, Vector::Constant(1, 1.0), 200000, rng);
  const double phi = 1.0 - std::pow(2.0, -2.0);
  const double se = std::sqrt((1.0 - phi * phi) / 200000);
  CHECK(std::abs(e.phi_hat[0] - phi) < 3.0 * se);
  CHECK(e.e.colwise().norm().maxCoeff() <= 2.0 * psi.uniform_bound());

  const auto e0 = effective_noise(psi, noise, Vector::Zero(1), 200000, rng);
  CHECK(std::abs(e0.phi_hat[0]) < 3.0 / std::sqrt(200000.0));
}
