#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlsgd/noise.hpp"
#include "nlsgd/nonlinearity.hpp"
#include "nlsgd/optimizer.hpp"
#include "nlsgd/problem.hpp"

namespace nlsgd {

struct ProblemSpec {
  std::string type = "quadratic";  // quadratic | isotropic | smooth_nonconvex
  std::size_t dim = 2;
  double mu = 1.0;
  double L = 10.0;
  std::uint64_t seed = 1;
  double curvature = 1.0;  // isotropic: A = curvature * I
  double minimizer = 0.0;  // isotropic: x* = minimizer * 1
};

struct NoiseSpec {
  std::string type = "power_tail";  // power_tail | log_squared | cauchy | radial_power_tail | mixture | point_mass
  double alpha = 3.0;
  double x0 = 0.0;
  double gamma = 1.0;
  double shift = 0.0;
  double lambda = 0.0;
  std::shared_ptr<NoiseSpec> symmetric;
  std::shared_ptr<NoiseSpec> nonsymmetric;
};

struct NonlinSpec {
  std::string type = "sign";  // sign | comp_clip | comp_quant | normalize | joint_clip
  double m = 1.0;
  double M = 1.0;
  std::size_t levels = 8;
  double range = 1.0;
};

struct ArmSpec {
  std::string name;
  NonlinSpec nonlinearity;
  StepSchedule schedule;
};

struct ProjectSpec {
  std::string stream = "noise";  // noise | gradient
  std::size_t n = 10000;
  std::uint64_t seed = 1;
};

struct VerifySpec {
  std::size_t axiom_samples = 1000;
  std::size_t huber_points = 50;
  std::size_t huber_n_mc = 100000;
  std::size_t selftest_n = 100000;
  std::size_t effective_n = 100000;
  std::size_t mgf_directions = 20;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t T = 1000;
  std::uint64_t runs = 1;
  std::uint64_t seed = 1;
  std::uint64_t threads = 0;  // 0: hardware concurrency
  std::uint64_t stride = 1;
  std::vector<std::string> metrics{"dist2"};
  std::vector<double> tail_eps{0.1, 0.01};
  std::size_t bootstrap_n = 1000;
  std::vector<double> x1{0.0};  // one value broadcasts to every coordinate
  ProblemSpec problem;
  NoiseSpec noise;
  std::vector<ArmSpec> arms;
  ProjectSpec project;
  VerifySpec verify;
};

/// Parses the sectioned key=value format:
///
///   [experiment] [problem] [noise] [arm NAME] [project] [verify]
///
/// `#` starts a comment; keys are unique per section; unknown sections and
/// keys are errors reported with their line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical key=value echo of every setting, one per line, in a fixed order.
std::string canonical_text(const ExperimentConfig& config);

Problem build_problem(const ProblemSpec& spec);
NoiseModel build_noise(const NoiseSpec& spec, std::size_t dim);
NonlinearMap build_nonlinearity(const NonlinSpec& spec, std::size_t dim);
Vector build_x1(const ExperimentConfig& config);

}  // namespace nlsgd
