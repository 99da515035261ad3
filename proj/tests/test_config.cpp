#include "doctest.h"
#include "nlsgd/config.hpp"
#include "nlsgd/error.hpp"

using namespace nlsgd;

namespace {

const char* kMinimal = R"(
[experiment]
T = 10
[problem]
type = quadratic
dim = 2
mu = 1
L = 2
[noise]
type = power_tail
alpha = 3
[arm s]
nonlinearity = sign
)";

}  // namespace

TEST_CASE("minimal config and defaults") {
  const auto c = parse_config(kMinimal);
  CHECK(c.T == 10);
  CHECK(c.runs >= 1);
  CHECK(c.arms.size() == 1);
  CHECK(c.arms[0].name == "s");
  CHECK(c.tail_eps == std::vector<double>{0.1, 0.01});
  CHECK(build_x1(c).size() == 2);
}

TEST_CASE("canonical text is stable under reformatting") {
  const std::string spaced = std::string(kMinimal) + "\n# trailing comment\n";
  CHECK(canonical_text(parse_config(kMinimal)) == canonical_text(parse_config(spaced)));
}

TEST_CASE("errors carry the line number") {
  try {
    parse_config("[experiment]\nT = 10\nbogus = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("malformed configs are rejected") {
  CHECK_THROWS_AS(parse_config("[wat]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nT = 1\nT = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("T = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nT = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nruns = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\ntail_eps = 0.1, -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[arm]\nnonlinearity = sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[arm t]\nnonlinearity = sign\ndelta = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[noise]\ntype = power_tail\nalpha = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nx1 = 1, 2, 3\n[problem]\ndim = 2\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/no/such/file.cfg"), IoError);
}

TEST_CASE("mixture noise sections") {
  const auto c = parse_config(R"(
[problem]
type = isotropic
dim = 3
curvature = 2
minimizer = 0.5
[noise]
type = mixture
lambda = 0.1
symmetric.type = power_tail
symmetric.alpha = 3
nonsymmetric.type = power_tail
nonsymmetric.shift = 2
)");
  REQUIRE(c.noise.nonsymmetric);
  CHECK(c.noise.nonsymmetric->shift == 2.0);
  CHECK(c.noise.nonsymmetric->alpha == 3.0);
  const auto noise = build_noise(c.noise, 3);
  CHECK_FALSE(noise.is_symmetric());
  const auto p = build_problem(c.problem);
  REQUIRE(p.x_star());
  CHECK((*p.x_star() - Vector::Constant(3, 0.5)).norm() < 1e-14);
}
