#include "nlsgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "nlsgd/error.hpp"

namespace nlsgd {

namespace {

constexpr std::uint64_t kBootstrapStream = 0x626f6f74;  // "boot"

unsigned resolve_threads(unsigned requested, std::uint64_t runs) {
  unsigned k = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(k, runs));
}

std::string output_name(const std::string& metric) {
  if (metric == "dist2") return "mse";
  if (metric == "wavg_dist2") return "wavg_mse";
  return metric;
}

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

}  // namespace

ArmRuns run_arm(const ExperimentConfig& config, const ArmSpec& arm, const Problem& problem, const NoiseModel& noise,
                const RunOptions& options) {
  const NonlinearMap psi = build_nonlinearity(arm.nonlinearity, problem.dim());
  const Vector x1 = build_x1(config);

  RecordOptions rec;
  rec.stride = config.stride;
  rec.dist2 = rec.gradnorm2 = rec.gap = false;
  for (const auto& m : config.metrics) {
    if (m == "dist2") rec.dist2 = true;
    if (m == "gradnorm2") rec.gradnorm2 = true;
    if (m == "gap") rec.gap = true;
    if (m == "wavg_dist2") rec.wavg_dist2 = true;
    if (m == "min_gradnorm2") rec.min_gradnorm2 = true;
    if (m == "avg_huber") rec.avg_huber = true;
  }

  const std::uint64_t R = config.runs;
  std::vector<Trajectory> trajs(R);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t r = next.fetch_add(1);
      if (r >= R) return;
      try {
        RunConfig rc;
        rc.problem = &problem;
        rc.nonlinearity = &psi;
        rc.noise = &noise;
        rc.schedule = arm.schedule;
        rc.x1 = x1;
        rc.T = config.T;
        rc.seed = config.seed + r;
        rc.stream = 0;
        rc.record = rec;
        trajs[r] = run(rc);
        if (trajs[r].aborted)
          throw NumericError("arm " + arm.name + " run " + std::to_string(r) + ": non-finite iterate at t=" +
                             std::to_string(trajs[r].abort_t));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(R);
        return;
      }
    }
  };
  const unsigned k = resolve_threads(options.threads, R);
  if (k <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < k; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ArmRuns out;
  out.arm = arm.name;
  out.t = trajs.front().t;
  for (auto& tr : trajs) {
    for (auto& [name, values] : tr.series) out.per_run[name].push_back(std::move(values));
    out.final_iterates.push_back(std::move(tr.final_iterate));
  }
  return out;
}

MetricSeries mean_curve(const ArmRuns& runs, const std::string& metric) {
  const auto it = runs.per_run.find(metric);
  if (it == runs.per_run.end() || it->second.empty())
    throw InvalidArgument("mean_curve: metric '" + metric + "' was not recorded");
  MetricSeries s;
  s.name = runs.arm + "__" + output_name(metric);
  s.t = runs.t;
  s.aggregation = "mean-over-runs";
  s.values.assign(runs.t.size(), 0.0);
  for (const auto& run : it->second)
    for (std::size_t i = 0; i < run.size(); ++i) s.values[i] += run[i];
  const auto R = static_cast<double>(it->second.size());
  for (auto& v : s.values) v /= R;
  return s;
}

MetricSeries mse_curve(const ArmRuns& runs) {
  if (!runs.per_run.count("dist2")) throw InvalidArgument("mse_curve: needs a known minimizer and the dist2 metric");
  return mean_curve(runs, "dist2");
}

MetricSeries tail_probability(const ArmRuns& runs, double eps, const std::vector<std::uint64_t>& t_grid,
                              std::size_t n, std::uint64_t seed) {
  const auto it = runs.per_run.find("dist2");
  if (it == runs.per_run.end()) throw InvalidArgument("tail_probability: dist2 was not recorded");
  if (n < 1) throw InvalidArgument("tail_probability: n must be >= 1");
  const auto& per_run = it->second;
  const std::size_t R = per_run.size();
  RngStream rng(seed, kBootstrapStream);
  MetricSeries s;
  s.name = runs.arm + "__tail_" + eps_tag(eps);
  s.aggregation = "bootstrap-probability";
  for (std::uint64_t t : t_grid) {
    const auto pos = std::lower_bound(runs.t.begin(), runs.t.end(), t);
    if (pos == runs.t.end() || *pos != t)
      throw InvalidArgument("tail_probability: t=" + std::to_string(t) + " is not on the recorded grid");
    const auto idx = static_cast<std::size_t>(pos - runs.t.begin());
    std::size_t hits = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto r = static_cast<std::size_t>(rng.bounded(R));
      if (per_run[r][idx] > eps) ++hits;
    }
    s.t.push_back(t);
    s.values.push_back(static_cast<double>(hits) / static_cast<double>(n));
  }
  return s;
}

namespace {

std::vector<double> stride1_gradnorm2(const Trajectory& traj, const Problem& problem) {
  if (traj.stride != 1) throw InvalidArgument("gradient metrics need a stride-1 trajectory");
  if (!traj.iterates.empty()) {
    std::vector<double> out;
    out.reserve(traj.iterates.size());
    for (const auto& x : traj.iterates) out.push_back(problem.grad(x).squaredNorm());
    return out;
  }
  const auto it = traj.series.find("gradnorm2");
  if (it == traj.series.end()) throw InvalidArgument("gradient metrics need iterates or the gradnorm2 series");
  return it->second;
}

}  // namespace

MetricSeries min_gradnorm_metric(const Trajectory& traj, const Problem& problem) {
  const auto g2 = stride1_gradnorm2(traj, problem);
  MetricSeries s;
  s.name = "min_gradnorm2";
  s.aggregation = "per-run";
  s.t = traj.t;
  double best = std::numeric_limits<double>::infinity();
  for (double v : g2) {
    best = std::min(best, v);
    s.values.push_back(best);
  }
  return s;
}

MetricSeries avg_huber_metric(const Trajectory& traj, const Problem& problem) {
  const auto g2 = stride1_gradnorm2(traj, problem);
  MetricSeries s;
  s.name = "avg_huber";
  s.aggregation = "per-run";
  s.t = traj.t;
  double sum = 0.0;
  for (std::size_t k = 0; k < g2.size(); ++k) {
    sum += std::min(std::sqrt(g2[k]), g2[k]);
    s.values.push_back(sum / static_cast<double>(k + 1));
  }
  return s;
}

stats::LineFit slope_fit(const MetricSeries& series, double t_lo, double t_hi) {
  if (!(t_lo < t_hi)) throw InvalidArgument("slope_fit: need t_lo < t_hi");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    const auto t = static_cast<double>(series.t[i]);
    if (t < t_lo || t > t_hi) continue;
    const double v = series.values[i];
    if (!(v > 0.0))
      throw InvalidArgument("slope_fit: non-positive value " + stats::format_double(v) + " at t=" +
                            std::to_string(series.t[i]));
    lx.push_back(std::log(t));
    ly.push_back(std::log(v));
  }
  if (lx.size() < 2) throw InvalidArgument("slope_fit: fewer than two points in the window");
  return stats::least_squares(lx, ly);
}

namespace {

std::vector<const ArmSpec*> select_arms(const ExperimentConfig& config, const std::string& filter) {
  std::vector<const ArmSpec*> out;
  for (const auto& a : config.arms)
    if (filter.empty() || a.name == filter) out.push_back(&a);
  if (config.arms.empty()) throw ConfigError("config defines no [arm] sections");
  if (out.empty()) throw ConfigError("no arm named '" + filter + "'");
  return out;
}

RunOptions effective_options(const ExperimentConfig& config, const RunOptions& options) {
  RunOptions o = options;
  if (o.threads == 0) o.threads = static_cast<unsigned>(config.threads);
  return o;
}

void common_notes(const ExperimentConfig& config, SimulationResult& result) {
  result.notes.emplace_back("run_seeds", std::to_string(config.seed) + ".." + std::to_string(config.seed + config.runs - 1));
  result.notes.emplace_back("run_stream", "0");
}

}  // namespace

SimulationResult simulate(const ExperimentConfig& config, const std::string& arm_filter, const RunOptions& options) {
  const auto arms = select_arms(config, arm_filter);
  const Problem problem = build_problem(config.problem);
  const NoiseModel noise = build_noise(config.noise, config.problem.dim);
  SimulationResult result;
  common_notes(config, result);
  for (const ArmSpec* arm : arms) {
    const ArmRuns runs = run_arm(config, *arm, problem, noise, effective_options(config, options));
    for (const auto& m : config.metrics) result.series.push_back(mean_curve(runs, m));
  }
  return result;
}

SimulationResult tailprob(const ExperimentConfig& config, const std::string& arm_filter, const RunOptions& options) {
  const auto arms = select_arms(config, arm_filter);
  const Problem problem = build_problem(config.problem);
  const NoiseModel noise = build_noise(config.noise, config.problem.dim);
  ExperimentConfig cfg = config;
  if (std::find(cfg.metrics.begin(), cfg.metrics.end(), "dist2") == cfg.metrics.end()) cfg.metrics.push_back("dist2");
  SimulationResult result;
  common_notes(config, result);
  result.notes.emplace_back("bootstrap", "fresh resample of run indices per t, with replacement");
  result.notes.emplace_back("bootstrap_n", std::to_string(config.bootstrap_n));
  result.notes.emplace_back("bootstrap_stream", std::to_string(kBootstrapStream));
  for (const ArmSpec* arm : arms) {
    const ArmRuns runs = run_arm(cfg, *arm, problem, noise, effective_options(config, options));
    for (double eps : config.tail_eps)
      result.series.push_back(tail_probability(runs, eps, runs.t, config.bootstrap_n, config.seed));
  }
  return result;
}

std::string version_string() { return NLSGD_VERSION_STRING; }

}  // namespace nlsgd
