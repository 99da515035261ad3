#include <cmath>
#include <algorithm>
#include <vector>

#include "doctest.h"
#include "nlsgd/rng.hpp"
#include "nlsgd/stats.hpp"

using namespace nlsgd;

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 0), b(42, 0), c(42, 1);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("uniforms lie in (0, 1)") {
  RngStream r(1, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 1e5 - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / 1e5));
}

TEST_CASE("kolmogorov survival function reference values") {
  CHECK(stats::kolmogorov_sf(0.0) == 1.0);
  CHECK(stats::kolmogorov_sf(1.3580986393225505) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(stats::kolmogorov_sf(1.6276236115189) == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("ks accepts uniform samples against the uniform cdf") {
  RngStream r(3, 0);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = r.uniform();
  const auto res = stats::ks_one_sample(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(res.p_value > 0.001);
  std::vector<double> shifted(20000);
  for (auto& x : shifted) x = 0.05 + 0.95 * r.uniform();
  CHECK(stats::ks_one_sample(shifted, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value < 1e-6);
}

TEST_CASE("least squares recovers a power law") {
  std::vector<double> lx, ly;
  for (int t = 1; t <= 100; ++t) {
    lx.push_back(std::log(t));
    ly.push_back(-0.25 * std::log(t) + 2.0);
  }
  const auto fit = stats::least_squares(lx, ly);
  CHECK(fit.slope == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mean and standard error") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto ms = stats::mean_std(v);
  CHECK(ms.mean == 2.5);
  CHECK(ms.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(ms.stderr_mean == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5}) CHECK(std::stod(stats::format_double(v)) == v);
}
