#include "nlsgd/optimizer.hpp"

#include <cmath>
#include <limits>

#include "nlsgd/error.hpp"

namespace nlsgd {

void StepSchedule::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("StepSchedule: a must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("StepSchedule: delta must lie in (0, 1]");
}

const std::vector<double>& Trajectory::at(const std::string& name) const {
  const auto it = series.find(name);
  if (it == series.end()) throw InvalidArgument("Trajectory: series '" + name + "' was not recorded");
  return it->second;
}

Trajectory run(const RunConfig& config) {
  if (!config.problem || !config.nonlinearity || !config.noise)
    throw InvalidArgument("run: problem, nonlinearity and noise are required");
  const Problem& problem = *config.problem;
  const NonlinearMap& psi = *config.nonlinearity;
  const NoiseModel& noise = *config.noise;
  const std::size_t d = problem.dim();
  if (psi.dim() != d || noise.dim() != d || static_cast<std::size_t>(config.x1.size()) != d)
    throw InvalidArgument("run: dimensions of problem, nonlinearity, noise and x1 disagree");
  if (config.T < 1) throw InvalidArgument("run: T must be >= 1");
  if (config.record.stride < 1) throw InvalidArgument("run: stride must be >= 1");
  if (!config.x1.allFinite()) throw InvalidArgument("run: x1 must be finite");
  config.schedule.validate();

  const RecordOptions& rec = config.record;
  const auto& xs = problem.x_star();
  if ((rec.dist2 || rec.wavg_dist2) && !xs)
    throw InvalidArgument("run: distance metrics need a known minimizer");

  Trajectory traj;
  traj.stride = rec.stride;
  const std::uint64_t last = config.T + 1;
  const std::uint64_t points = (config.T + rec.stride - 1) / rec.stride + 1;
  traj.t.reserve(points);
  auto make_series = [&](bool on, const char* name) -> std::vector<double>* {
    if (!on) return nullptr;
    auto& v = traj.series[name];
    v.reserve(points);
    return &v;
  };
  auto* s_dist2 = make_series(rec.dist2, "dist2");
  auto* s_grad2 = make_series(rec.gradnorm2, "gradnorm2");
  auto* s_gap = make_series(rec.gap, "gap");
  auto* s_wavg = make_series(rec.wavg_dist2, "wavg_dist2");
  auto* s_min = make_series(rec.min_gradnorm2, "min_gradnorm2");
  auto* s_huber = make_series(rec.avg_huber, "avg_huber");
  const bool need_grad_metrics = s_grad2 || s_min || s_huber;

  RngStream rng(config.seed, config.stream);
  const auto n = static_cast<Eigen::Index>(d);
  Vector x = config.x1;
  Vector g(n), z(n), step(n);
  Vector wsum = Vector::Zero(n), psum = Vector::Zero(n);
  double alpha_sum = 0.0;
  double min_g2 = std::numeric_limits<double>::infinity();
  double huber_sum = 0.0;

  for (std::uint64_t t = 1; t <= last; ++t) {
    problem.grad(x, g);
    const double alpha = config.schedule(t);
    wsum += alpha * x;
    psum += x;
    alpha_sum += alpha;
    if (need_grad_metrics) {
      const double g2 = g.squaredNorm();
      min_g2 = std::min(min_g2, g2);
      huber_sum += std::min(std::sqrt(g2), g2);
    }
    if ((t - 1) % rec.stride == 0 || t == last) {
      traj.t.push_back(t);
      if (s_dist2) s_dist2->push_back((x - *xs).squaredNorm());
      if (s_grad2) s_grad2->push_back(g.squaredNorm());
      if (s_gap) s_gap->push_back(problem.gap(x));
      if (s_wavg) s_wavg->push_back((wsum / alpha_sum - *xs).squaredNorm());
      if (s_min) s_min->push_back(min_g2);
      if (s_huber) s_huber->push_back(huber_sum / static_cast<double>(t));
      if (rec.iterates) traj.iterates.push_back(x);
    }
    if (t == last) break;

    noise.sample(rng, z);
    g += z;
    psi.apply(g, step);
    x.noalias() -= alpha * step;
    traj.iterations = t;
    if (!x.allFinite()) {
      traj.aborted = true;
      traj.abort_t = t + 1;
      break;
    }
  }

  traj.final_iterate = x;
  traj.weighted_average = wsum / alpha_sum;
  traj.plain_average = psum / static_cast<double>(traj.aborted ? traj.iterations : last);
  return traj;
}

Vector weighted_average(const Trajectory& traj, const StepSchedule& schedule, std::uint64_t t) {
  if (traj.stride != 1) throw InvalidArgument("weighted_average: needs iterates recorded at stride 1");
  if (t < 1 || t > traj.iterates.size())
    throw InvalidArgument("weighted_average: iterates 1.." + std::to_string(t) + " are not available");
  double total = 0.0;
  for (std::uint64_t k = 1; k <= t; ++k) total += schedule(k);
  Vector out = Vector::Zero(traj.iterates.front().size());
  for (std::uint64_t k = 1; k <= t; ++k) out += (schedule(k) / total) * traj.iterates[k - 1];
  return out;
}

EffectiveNoise effective_noise(const NonlinearMap& nonlinearity, const NoiseModel& noise, ConstVectorRef x,
                               std::size_t n_mc, RngStream& rng) {
  if (n_mc < 1000) throw InvalidArgument("effective_noise: n_mc must be >= 1000");
  const auto d = static_cast<Eigen::Index>(nonlinearity.dim());
  if (noise.dim() != nonlinearity.dim() || x.size() != d)
    throw InvalidArgument("effective_noise: dimension mismatch");
  EffectiveNoise out;
  out.e.resize(d, static_cast<Eigen::Index>(n_mc));
  Vector z(d), psi(d);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n_mc); ++i) {
    noise.sample(rng, z);
    z += x;
    nonlinearity.apply(z, psi);
    out.e.col(i) = psi;
  }
  out.phi_hat = out.e.rowwise().mean();
  out.e = (-out.e).colwise() + out.phi_hat;
  return out;
}

}  // namespace nlsgd
