#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nlsgd/noise.hpp"
#include "nlsgd/nonlinearity.hpp"
#include "nlsgd/problem.hpp"

namespace nlsgd {

/// alpha_t = a / (t + 1)^delta, t = 1, 2, ...
struct StepSchedule {
  double a = 1.0;
  double delta = 1.0;

  void validate() const;
  double operator()(std::uint64_t t) const noexcept { return a / std::pow(static_cast<double>(t) + 1.0, delta); }
};

struct RecordOptions {
  std::uint64_t stride = 1;
  bool iterates = false;
  bool dist2 = true;          // |x(t) - x*|^2
  bool gradnorm2 = false;     // |grad f(x(t))|^2
  bool gap = false;           // f(x(t)) - f*
  bool wavg_dist2 = false;    // |xhat(t) - x*|^2
  bool min_gradnorm2 = false; // min_{k<=t} |grad f(x(k))|^2
  bool avg_huber = false;     // (1/t) sum_{k<=t} min{|g_k|, |g_k|^2}
};

struct RunConfig {
  const Problem* problem = nullptr;
  const NonlinearMap* nonlinearity = nullptr;
  const NoiseModel* noise = nullptr;
  StepSchedule schedule;
  Vector x1;
  std::uint64_t T = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  RecordOptions record;
};

/// Iterates are indexed t = 1 .. T+1, x(1) being the start. Metric series are
/// sampled at t = 1, 1 + stride, ... and always at T + 1.
struct Trajectory {
  std::vector<std::uint64_t> t;
  std::map<std::string, std::vector<double>> series;
  std::vector<Vector> iterates;  // aligned with t when record.iterates is set
  Vector final_iterate;
  Vector weighted_average;  // sum_k alpha_k x(k) / sum_k alpha_k over k <= T+1
  Vector plain_average;
  std::uint64_t stride = 1;
  std::uint64_t iterations = 0;  // updates actually performed
  bool aborted = false;
  std::uint64_t abort_t = 0;  // index of the first non-finite iterate

  const std::vector<double>& at(const std::string& name) const;
};

Trajectory run(const RunConfig& config);

/// sum_{k<=t} alpha_k x(k) / sum_{k<=t} alpha_k from stride-1 recorded iterates.
Vector weighted_average(const Trajectory& traj, const StepSchedule& schedule, std::uint64_t t);

struct EffectiveNoise {
  Vector phi_hat;  // (1/n) sum Psi(x + z_i)
  Matrix e;        // column i is phi_hat - Psi(x + z_i)
};

EffectiveNoise effective_noise(const NonlinearMap& nonlinearity, const NoiseModel& noise, ConstVectorRef x,
                               std::size_t n_mc, RngStream& rng);

}  // namespace nlsgd
