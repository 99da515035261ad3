#include <cmath>

#include "doctest.h"
#include "nlsgd/error.hpp"
#include "nlsgd/theory.hpp"

using namespace nlsgd;
using namespace nlsgd::theory;

TEST_CASE("eta constants for sign under power tail noise") {
  const auto eta = eta_constants(NonlinearMap::sign(100), NoiseModel::power_tail(100, 2.05));
  CHECK(eta.eta1 == doctest::Approx(1.05 / (2.0 * 2.05 * 10.0)).epsilon(1e-14));
  CHECK(eta.eta1 == doctest::Approx(0.025610).epsilon(1e-4));
  CHECK(eta.eta2 == doctest::Approx(0.00525).epsilon(1e-14));
  CHECK(eta.C == doctest::Approx(10.0));
  CHECK(eta.provenance == Provenance::Approximate);
}

TEST_CASE("eta constants for joint clipping use the density at zero") {
  const auto noise = NoiseModel::power_tail(2, 3.0);
  const auto eta = eta_constants(NonlinearMap::joint_clip(2, 1.0), noise);
  CHECK(eta.p0 == doctest::Approx(noise.density(Vector::Zero(2))).epsilon(1e-14));
  CHECK(eta.p0 == doctest::Approx(1.0));
  CHECK(eta.eta1 == doctest::Approx(0.5));
  CHECK(eta.eta2 == doctest::Approx(1.0));
  CHECK(eta.provenance == Provenance::Analytic);
}

TEST_CASE("component clipping constants vanish as m approaches one") {
  const auto noise = NoiseModel::power_tail(4, 3.0);
  double prev = 1.0;
  for (double m : {2.0, 1.1, 1.01, 1.0001}) {
    const double e1 = eta_constants(NonlinearMap::comp_clip(4, m), noise).eta1;
    CHECK(e1 < prev);
    prev = e1;
  }
  CHECK(prev < 1e-4);
  CHECK_THROWS_AS(eta_constants(NonlinearMap::comp_clip(4, 1.0), noise), InvalidArgument);
  CHECK_THROWS_AS(eta_constants(NonlinearMap::normalize(4), noise), Unsupported);
  CHECK_THROWS_AS(eta_constants(NonlinearMap::sign(4), NoiseModel::cauchy(4)), Unsupported);
}

TEST_CASE("inner product bound for sign at x = 1") {
  const auto psi = NonlinearMap::sign(1);
  const auto noise = NoiseModel::power_tail(1, 3.0);
  const auto eta = eta_constants(psi, noise);
  const double phi = 1.0 - std::pow(2.0, -2.0);
  CHECK(phi == doctest::Approx(0.75));
  CHECK(phi >= std::min(eta.eta1, eta.eta2));

  RngStream rng(1, 0);
  const auto rep = verify_huber(psi, noise, {Vector::Constant(1, 1.0), Vector::Zero(1)}, 100000, rng, eta);
  CHECK(std::abs(rep.points[0].estimate - 0.75) < 3.0 * rep.points[0].stderr_mc);
  CHECK(rep.points[1].estimate == 0.0);
  CHECK(rep.points[1].bound == 0.0);
  CHECK(rep.violations == 0);
}

TEST_CASE("inner product bound holds on a grid for sign and component clipping") {
  for (const auto& psi : {NonlinearMap::sign(3), NonlinearMap::comp_clip(3, 2.0)}) {
    const auto noise = NoiseModel::power_tail(3, 3.0);
    RngStream rng(2, 0);
    const auto grid = log_grid(3, 20, 1e-2, 1e2, 9);
    const auto rep = verify_huber(psi, noise, grid, 20000, rng, eta_constants(psi, noise));
    CHECK_MESSAGE(rep.violations == 0, psi.name());
    CHECK(rep.fit_ok);
  }
}

TEST_CASE("log grid norms") {
  const auto grid = log_grid(4, 5, 1e-2, 1e2, 3);
  REQUIRE(grid.size() == 5);
  CHECK(grid.front().norm() == doctest::Approx(1e-2));
  CHECK(grid[2].norm() == doctest::Approx(1.0));
  CHECK(grid.back().norm() == doctest::Approx(1e2));
}

TEST_CASE("fitted constants for a pair without a closed form") {
  const auto psi = NonlinearMap::normalize(2);
  const auto noise = NoiseModel::cauchy(2);
  RngStream rng(3, 0);
  const auto rep = verify_huber(psi, noise, log_grid(2, 20, 1e-2, 1e2, 1), 20000, rng, std::nullopt);
  REQUIRE(rep.fit_ok);
  const auto eta = fitted_eta(psi, rep);
  CHECK(eta.provenance == Provenance::Fitted);
  CHECK(eta.eta1 > 0.0);
  CHECK(eta.eta2 > 0.0);
  for (const auto& p : rep.points) {
    double cap = p.estimate - 3.0 * p.stderr_mc;
    if (cap <= 0.0) cap = p.estimate + 3.0 * p.stderr_mc;
    CHECK(cap >= std::min(eta.eta1 * p.norm, eta.eta2 * p.norm * p.norm) * (1 - 1e-12));
  }
}

TEST_CASE("gamma for sign with a known plug-in") {
  const auto eta = eta_constants(NonlinearMap::sign(1), NoiseModel::power_tail(1, 3.0));
  CHECK(eta.phi_prime0 == doctest::Approx(2.0));
  CHECK(eta.xi == doctest::Approx(1.0 / 3.0));
  const double g = gamma(1.0, 0.75, eta, 1.0, 0.0);
  CHECK(g == doctest::Approx(0.25 * 2.0 * (1.0 / 3.0) / 2.0).epsilon(1e-14));
  CHECK(g == doctest::Approx(0.0833).epsilon(1e-3));
  CHECK(gamma(1.0, 0.75, eta, 1.0, 1.0) < g);
  CHECK(gamma(1.0, 0.75, eta, 2.0, 0.0) < g);
}

TEST_CASE("zeta caps at 2 delta - 1") {
  CHECK(zeta(0.75, 1.0, 1.0, 1.8) == doctest::Approx(0.5));
  CHECK_THROWS_AS(zeta(0.5, 1.0, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("zeta is monotone in its inputs") {
  const auto eta = eta_constants(NonlinearMap::sign(4), NoiseModel::power_tail(4, 2.5));
  auto z = [&](double mu, double a, double L, std::size_t d) {
    const auto e = eta_constants(NonlinearMap::sign(d), NoiseModel::power_tail(d, 2.5));
    return zeta(0.75, a, mu, gamma(a, 0.75, e, L, 0.5));
  };
  (void)eta;
  const double base = z(1.0, 1.0, 2.0, 4);
  CHECK(base > 0.0);
  CHECK(base < 1.0);
  CHECK(z(1.1, 1.0, 2.0, 4) >= base);
  CHECK(z(1.0, 1.1, 2.0, 4) >= base);
  CHECK(z(1.0, 1.0, 2.2, 4) <= base);
  CHECK(z(1.0, 1.0, 2.0, 9) <= base);
}

TEST_CASE("sign closed-form zeta") {
  for (double eps : {0.05, 0.5, 1.0})
    for (std::size_t d : {1u, 10u, 100u}) {
      const double mu = 1.0, L = 10.0, a = 1.0;
      const double closed = std::min(0.5, mu * (1.0 + eps) / (4.0 * L * std::sqrt(double(d)) * (2.0 + eps)));
      CHECK(sign_power_tail_zeta(mu, L, d, eps) == doctest::Approx(closed).epsilon(1e-15));
      CHECK(zeta(0.75, a, mu, sign_power_tail_gamma(a, L, d, eps)) == doctest::Approx(closed).epsilon(1e-14));
      CHECK(closed > mu / (8.0 * L * std::sqrt(double(d))));
    }
}

TEST_CASE("nonconvex bound matches the hand-evaluated regimes") {
  NonconvexInputs in;
  in.t = 1000;
  in.a = 0.5;
  in.L = 2.0;
  in.C = 1.5;
  in.eta1 = 0.3;
  in.eta2 = 0.4;
  in.gap1 = 1.2;
  in.DX = 0.7;
  in.beta = 0.1;
  const double head = 1.2 + std::log(10.0);
  const double c4 = std::pow(0.5, 3) * std::pow(1.5, 4) * 4.0;

  in.delta = 0.75;
  auto b = nonconvex_bound(in);
  const double R3 = head / 2.0 + 0.5 * 2.0 * 2.25 * (0.25 + 8.0 * 0.7) + 32.0 * c4 * std::log(1001.0);
  const double den = std::pow(1002.0, 0.25) - std::pow(2.0, 0.25);
  CHECK(b.regime == 2);
  CHECK(b.R3 == doctest::Approx(R3).epsilon(1e-14));
  CHECK(b.value == doctest::Approx(2 * R3 / 0.4 / den + std::pow(std::sqrt(2.0) * R3 / 0.3 / den, 2)).epsilon(1e-13));

  in.delta = 0.7;
  b = nonconvex_bound(in);
  const double R1 = 0.3 * (head / 0.5 + 0.5 * 2.0 * 2.25 * (0.5 + 16.0 * 0.7) / 0.4);
  const double R2 = 8.0 * c4 / (0.3 * (3.0 - 2.8));
  const double d1 = std::pow(1002.0, 0.3) - std::pow(2.0, 0.3);
  const double d2 = std::pow(1002.0, 0.1) - std::pow(2.0, 0.1);
  CHECK(b.regime == 1);
  CHECK(b.kappa == doctest::Approx(0.1));
  CHECK(b.value == doctest::Approx(2 * R1 / 0.4 / d1 + 2 * R2 / 0.4 / d2 + std::pow(2 * R1 / 0.3 / d1, 2) +
                                   std::pow(2 * R2 / 0.3 / d2, 2))
                       .epsilon(1e-13));

  in.delta = 0.9;
  b = nonconvex_bound(in);
  const double R1b = 0.1 * (head / 0.5 + 0.5 * 2.0 * 2.25 * (0.5 + 16.0 * 0.7) / 0.8);
  const double R4 = R1b + 8.0 * c4 / (0.1 * 0.6);
  const double d3 = std::pow(1002.0, 0.1) - std::pow(2.0, 0.1);
  CHECK(b.regime == 3);
  CHECK(b.R4 == doctest::Approx(R4).epsilon(1e-14));
  CHECK(b.value == doctest::Approx(2 * R4 / 0.4 / d3 + std::pow(std::sqrt(2.0) * R4 / 0.3 / d3, 2)).epsilon(1e-13));
}

TEST_CASE("nonconvex bound edge behaviour") {
  NonconvexInputs in;
  in.beta = 1.0;
  in.gap1 = 0.0;
  in.delta = 0.75;
  in.t = 10;
  const auto b = nonconvex_bound(in);
  CHECK(b.R3 == doctest::Approx(in.a * in.L * (0.25) + 32.0 * std::log(11.0)));

  for (double delta : {0.7, 0.75, 0.9}) {
    in.delta = delta;
    double prev = INFINITY;
    int rises = 0;
    for (double t = 2; t <= 1e6; t *= 1.5) {
      in.t = t;
      const double v = nonconvex_bound(in).value;
      if (t > 100 && v > prev) ++rises;
      prev = v;
    }
    CHECK(rises == 0);
  }
  in.delta = 0.6;
  CHECK_THROWS_AS(nonconvex_bound(in), InvalidArgument);
}

TEST_CASE("mixture neighborhood for sign") {
  const double alpha = 3.0;
  const std::size_t d = 5;
  const auto eta = eta_constants(NonlinearMap::sign(d), NoiseModel::power_tail(d, alpha));
  const double lambda = 0.02;
  const auto nb = mixture_neighborhood(lambda, eta.eta1, eta.eta2, eta.C);
  const double dd = double(d);
  CHECK(nb.size == doctest::Approx(2 * dd * dd * lambda / (alpha * (alpha - 1) * (1 - lambda))).epsilon(1e-13));
  CHECK(nb.lambda_max == doctest::Approx((alpha - 1) / (alpha * (2 * dd + 1) - 1)).epsilon(1e-13));
  CHECK(mixture_neighborhood(0.0, eta.eta1, eta.eta2, eta.C).size == 0.0);
}

TEST_CASE("mixture neighborhood for joint clipping") {
  const double alpha = 2.5, M = 0.5;
  const std::size_t d = 3;
  const auto eta = eta_constants(NonlinearMap::joint_clip(d, M), NoiseModel::power_tail(d, alpha));
  const double lambda = 0.01;
  const auto nb = mixture_neighborhood(lambda, eta.eta1, eta.eta2, eta.C);
  const double a1d = std::pow(alpha - 1, d);
  CHECK(nb.size == doctest::Approx(std::pow(2.0, d - 1.0) * lambda * M / (a1d * (1 - lambda) * M)).epsilon(1e-12));
  CHECK(nb.lambda_max == doctest::Approx(eta.eta1 / (eta.eta1 + eta.C)).epsilon(1e-14));
  CHECK(nb.lambda_max == doctest::Approx(a1d / (a1d + std::pow(2.0, d + 1.0))).epsilon(1e-12));
}

TEST_CASE("competitor rates") {
  const auto r2 = competitor_rates(2.0);
  CHECK(r2.nonconvex_exp == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(r2.strongly_convex_exp == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(competitor_rates(6.0 / 5.0).nonconvex_exp + 0.25) < 1e-12);
  CHECK(std::abs(competitor_rates(8.0 / 7.0).strongly_convex_exp + 0.25) < 1e-12);
  const auto near1 = competitor_rates(1.0 + 1e-9);
  CHECK(std::abs(near1.nonconvex_exp) < 1e-8);
  CHECK(std::abs(near1.strongly_convex_exp) < 1e-8);
  CHECK(competitor_rates(1.1).nonconvex_worse_than_quarter);
  CHECK_FALSE(competitor_rates(1.3).nonconvex_worse_than_quarter);
  CHECK_THROWS_AS(competitor_rates(1.0), InvalidArgument);
}

TEST_CASE("dimension comparison scales") {
  const auto low = dimension_comparison(2.05, 2.0, 100.0, 10);
  CHECK(low.joint_scale == doctest::Approx(std::pow(0.525, -10.0)));
  CHECK(low.component_scale == doctest::Approx(1000.0));
  CHECK(dimension_comparison(2.05, 2.0, 100.0, 40).joint_scale > dimension_comparison(2.05, 2.0, 100.0, 20).joint_scale);
  for (std::size_t d : {1u, 7u, 50u}) CHECK(dimension_comparison(3.0, 2.0, 1.0, d).joint_scale == doctest::Approx(1.0));
  const auto one = dimension_comparison(2.05, 2.0, 1.0, 1);
  CHECK(std::isfinite(one.component_constant));
  CHECK(std::isfinite(one.joint_constant));
  CHECK(low.crossover_d > 0);
}

TEST_CASE("sub-gaussian bookkeeping on bounded effective noise") {
  const auto psi = NonlinearMap::sign(3);
  const auto noise = NoiseModel::power_tail(3, 2.05);
  RngStream rng(6, 0);
  const auto e = effective_noise(psi, noise, Vector::Constant(3, 0.2), 50000, rng);
  const auto chk = check_subgaussian(e, psi.uniform_bound(), 10, {0.1, 1.0}, 3);
  CHECK(chk.norm_ok);
  CHECK(chk.mgf_ok);
  CHECK(chk.mgf.size() == 20);
}

TEST_CASE("finite-difference phi'(0) for sign") {
  RngStream rng(12, 0);
  const auto est = phi_prime_mc(NonlinearMap::sign(1), NoiseModel::power_tail(1, 3.0), 1e-3, 2000000, rng);
  CHECK(std::abs(est.mean - 2.0) / 2.0 < 0.05);
}

TEST_CASE("report keys and formats") {
  const auto psi = NonlinearMap::sign(2);
  const auto noise = NoiseModel::power_tail(2, 3.0);
  ReportInputs in;
  in.nonlinearity = &psi;
  in.noise = &noise;
  in.L = 2.0;
  in.mu = 1.0;
  in.dist1 = 1.0;
  in.gap1 = 0.5;
  in.DX = 1.0;
  const auto r = build_report(in);
  for (const char* key : {"C", "eta1", "eta2", "gamma", "zeta", "regime", "nonconvex_bound", "competitor_nonconvex_exp"})
    CHECK_MESSAGE(r.find(key) != nullptr, key);
  CHECK(*r.find("eta_provenance") == "approximate");
  CHECK(r.to_text().find("eta1=") != std::string::npos);
  CHECK(r.to_csv().rfind("key,value\n", 0) == 0);

  in.delta = 0.6;
  const auto r2 = build_report(in);
  CHECK(r2.find("nonconvex_bound") == nullptr);
  CHECK(*r2.find("rate_guarantee") == "none");

  const auto cauchy = NoiseModel::cauchy(2);
  in.noise = &cauchy;
  in.delta = 0.75;
  in.fit_n_mc = 5000;
  in.fit_points = 10;
  CHECK(*build_report(in).find("eta_provenance") == "fitted");
}
