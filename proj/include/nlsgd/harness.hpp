#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nlsgd/config.hpp"
#include "nlsgd/optimizer.hpp"
#include "nlsgd/stats.hpp"
#include "nlsgd/theory.hpp"

namespace nlsgd {

struct MetricSeries {
  std::string name;
  std::vector<std::uint64_t> t;
  std::vector<double> values;
  std::string aggregation;  // per-run | mean-over-runs | bootstrap-probability
};

/// Every run of one arm, aligned on a shared t grid.
struct ArmRuns {
  std::string arm;
  std::vector<std::uint64_t> t;
  std::map<std::string, std::vector<std::vector<double>>> per_run;  // metric -> run -> values
  std::vector<Vector> final_iterates;
};

struct RunOptions {
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Runs config.runs trajectories of `arm`; run r uses seed config.seed + r on
/// stream 0, so every arm sees the same noise sequence.
ArmRuns run_arm(const ExperimentConfig& config, const ArmSpec& arm, const Problem& problem, const NoiseModel& noise,
                const RunOptions& options = {});

/// Mean over runs of |x(t) - x*|^2.
MetricSeries mse_curve(const ArmRuns& runs);
/// Mean over runs of any recorded metric.
MetricSeries mean_curve(const ArmRuns& runs, const std::string& metric);

/// For each t in t_grid (a subset of runs.t), n run indices drawn uniformly
/// with replacement, fresh per t, and the fraction with dist2 > eps.
MetricSeries tail_probability(const ArmRuns& runs, double eps, const std::vector<std::uint64_t>& t_grid,
                              std::size_t n, std::uint64_t seed);

/// Running min of |grad f|^2 and running mean of min{|grad f|, |grad f|^2}
/// from a stride-1 trajectory (iterates, or the gradnorm2 series).
MetricSeries min_gradnorm_metric(const Trajectory& traj, const Problem& problem);
MetricSeries avg_huber_metric(const Trajectory& traj, const Problem& problem);

/// Least squares of log(value) on log(t) over t in [t_lo, t_hi].
stats::LineFit slope_fit(const MetricSeries& series, double t_lo, double t_hi);

struct SimulationResult {
  std::vector<MetricSeries> series;  // named <arm>__<metric>
  std::vector<std::pair<std::string, std::string>> notes;  // extra manifest lines
};

/// Runs every arm (or only `arm_filter` when non-empty) and aggregates the
/// configured metrics as means over runs.
SimulationResult simulate(const ExperimentConfig& config, const std::string& arm_filter, const RunOptions& options);

/// Same runs, reduced to bootstrap tail probabilities for every tail_eps.
SimulationResult tailprob(const ExperimentConfig& config, const std::string& arm_filter, const RunOptions& options);

struct ProjectionResult {
  Matrix points;  // n x 2
  double mean_ratio = 0.0;  // |mean of points| / mean |point|
  std::vector<stats::KsResult> ks;  // one per in-plane direction
  std::vector<std::pair<double, double>> directions;
};

using VectorStream = std::function<void(RngStream&, VectorRef)>;

/// Projects n stream vectors (minus `center`) through a 2 x d standard
/// Gaussian matrix and measures central symmetry of the cloud.
ProjectionResult projection_diagnostic(const VectorStream& stream, ConstVectorRef center, std::size_t n,
                                       std::uint64_t seed, std::size_t directions = 8);

/// projection_diagnostic on the stream described by config.project.
ProjectionResult project(const ExperimentConfig& config);

std::string format_csv(const MetricSeries& series);
MetricSeries parse_csv(const std::string& text, const std::string& name);
std::string format_points_csv(const Matrix& points);

/// Writes <name>.csv for each series, plot_<metric>.gp scripts and a
/// manifest. Returns the file names written, manifest last.
std::vector<std::string> emit(const std::string& out_dir, const ExperimentConfig& config, const SimulationResult& result);

/// TheoryReport for one arm: L, mu, dist1 = |x1 - x*|, gap1 and D_X = dist1^2
/// come from the problem, (a, delta) from the arm, t = T and beta = 0.05.
theory::TheoryReport theory_for_arm(const ExperimentConfig& config, const ArmSpec& arm);

struct VerifyResult {
  std::vector<std::pair<std::string, std::string>> lines;
  bool passed = true;
};

/// Axiom checks and the inner-product lower bound per arm, effective-noise bounds
/// at grad f(x1), and sampler self-tests for the noise (and its mixture
/// components).
VerifyResult verify_config(const ExperimentConfig& config, const std::string& arm_filter);

std::string version_string();

}  // namespace nlsgd
