#include "nlsgd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nlsgd/error.hpp"

namespace nlsgd::theory {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Analytic: return "analytic";
    case Provenance::Approximate: return "approximate";
    case Provenance::Fitted: return "fitted";
  }
  return "unknown";
}

namespace {

const NoiseModel& symmetric_part(const NoiseModel& noise) {
  if (const auto* m = std::get_if<noise::Mixture>(&noise.variant())) return *m->symmetric;
  return noise;
}

bool in_open(double v, double lo, double hi) { return v > lo && v < hi; }

}  // namespace

EtaConstants eta_constants(const NonlinearMap& nonlinearity, const NoiseModel& noise_model) {
  const NoiseModel& noise = symmetric_part(noise_model);
  if (noise.dim() != nonlinearity.dim()) throw InvalidArgument("eta_constants: dimension mismatch");
  const auto* pt = std::get_if<noise::PowerTail>(&noise.variant());
  if (!pt) throw Unsupported("eta_constants: no closed form for noise " + noise.name() + "; use a fitted pair");
  const double alpha = pt->alpha;
  const auto d = static_cast<double>(nonlinearity.dim());
  EtaConstants out;
  out.C = nonlinearity.uniform_bound();
  const auto& v = nonlinearity.variant();
  if (std::holds_alternative<nonlin::Sign>(v)) {
    out.phi_prime0 = alpha - 1.0;
    out.xi = 1.0 / alpha;
    out.provenance = Provenance::Approximate;
  } else if (const auto* cc = std::get_if<nonlin::CompClip>(&v)) {
    if (!(cc->m > 1.0)) throw InvalidArgument("eta_constants: component clipping needs m > 1");
    out.phi_prime0 = 1.0 - std::pow(cc->m + 1.0, -alpha);
    out.xi = cc->m - 1.0;
    out.provenance = Provenance::Approximate;
  } else if (const auto* jc = std::get_if<nonlin::JointClip>(&v)) {
    out.joint = true;
    out.p0 = std::pow(0.5 * (alpha - 1.0), d);
    out.n2_at_1 = std::min(1.0, jc->M);
    out.eta2 = out.p0 * out.n2_at_1;
    out.eta1 = 0.5 * out.eta2;
    out.provenance = Provenance::Analytic;
    return out;
  } else {
    throw Unsupported("eta_constants: no closed form for " + nonlinearity.name() + "; use a fitted pair");
  }
  out.eta1 = out.phi_prime0 * out.xi / (2.0 * std::sqrt(d));
  out.eta2 = out.phi_prime0 / (2.0 * d);
  return out;
}

std::vector<Vector> log_grid(std::size_t dim, std::size_t count, double lo, double hi, std::uint64_t seed) {
  if (count == 0 || !(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("log_grid: need count >= 1 and 0 < lo <= hi");
  RngStream rng(seed, 0x6772);
  std::vector<Vector> out;
  out.reserve(count);
  const auto n = static_cast<Eigen::Index>(dim);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    const double r = lo * std::pow(hi / lo, s);
    Vector u(n);
    do {
      for (auto& ui : u) ui = rng.normal();
    } while (u.squaredNorm() == 0.0);
    out.push_back(u * (r / u.norm()));
  }
  return out;
}

HuberReport verify_huber(const NonlinearMap& nonlinearity, const NoiseModel& noise, const std::vector<Vector>& grid,
                         std::size_t n_mc, RngStream& rng, std::optional<EtaConstants> eta) {
  if (grid.empty()) throw InvalidArgument("verify_huber: empty grid");
  if (n_mc < 2) throw InvalidArgument("verify_huber: n_mc must be >= 2");
  const auto d = static_cast<Eigen::Index>(nonlinearity.dim());
  if (noise.dim() != nonlinearity.dim()) throw InvalidArgument("verify_huber: dimension mismatch");
  HuberReport report;
  Vector z(d), psi(d);
  std::vector<double> vals(n_mc);
  for (const Vector& x : grid) {
    if (x.size() != d) throw InvalidArgument("verify_huber: grid point dimension mismatch");
    for (std::size_t i = 0; i < n_mc; ++i) {
      noise.sample(rng, z);
      z += x;
      nonlinearity.apply(z, psi);
      vals[i] = psi.dot(x);
    }
    const auto ms = stats::mean_std(vals);
    HuberPoint p;
    p.norm = x.norm();
    p.estimate = ms.mean;
    p.stderr_mc = ms.stderr_mean;
    if (eta) {
      p.bound = std::min(eta->eta1 * p.norm, eta->eta2 * p.norm * p.norm);
      p.passed = p.estimate >= p.bound - 3.0 * p.stderr_mc;
      if (!p.passed) ++report.violations;
    }
    report.points.push_back(p);
  }

  // Largest (eta1, eta2) below est - 3 se at every resolved point (est + 3 se
  // where est - 3 se <= 0): scan the breakpoint eta1/eta2 over the grid norms
  // and keep the one maximizing eta1 * eta2.
  double best = -1.0;
  for (const auto& cand : report.points) {
    const double kappa = cand.norm;
    if (!(kappa > 0.0)) continue;
    double e2 = std::numeric_limits<double>::infinity();
    bool feasible = true;
    for (const auto& p : report.points) {
      if (!(p.norm > 0.0)) continue;
      double lower = p.estimate - 3.0 * p.stderr_mc;
      if (!(lower > 0.0)) lower = p.estimate + 3.0 * p.stderr_mc;
      if (!(lower > 0.0)) {
        feasible = false;
        break;
      }
      e2 = std::min(e2, lower / std::min(kappa * p.norm, p.norm * p.norm));
    }
    if (!feasible || !std::isfinite(e2)) continue;
    const double score = kappa * e2 * e2;
    if (score > best) {
      best = score;
      report.fitted_eta2 = e2;
      report.fitted_eta1 = kappa * e2;
      report.fit_ok = true;
    }
  }
  return report;
}

EtaConstants fitted_eta(const NonlinearMap& nonlinearity, const HuberReport& report) {
  if (!report.fit_ok) throw NumericError("fitted_eta: no positive constants are consistent with the grid");
  EtaConstants out;
  out.eta1 = report.fitted_eta1;
  out.eta2 = report.fitted_eta2;
  out.C = nonlinearity.uniform_bound();
  out.provenance = Provenance::Fitted;
  const auto d = static_cast<double>(nonlinearity.dim());
  if (nonlinearity.is_component_wise()) {
    out.phi_prime0 = 2.0 * d * out.eta2;
    out.xi = 2.0 * std::sqrt(d) * out.eta1 / out.phi_prime0;
  } else {
    out.joint = true;
    out.n2_at_1 = nonlinearity.joint_factor(1.0);
    out.p0 = out.eta2 / out.n2_at_1;
  }
  return out;
}

double gamma(double a, double delta, const EtaConstants& eta, double L, double dist1, double B0) {
  if (!in_open(delta, 0.5, 1.0)) throw InvalidArgument("gamma: delta must lie in (1/2, 1)");
  if (!(a > 0.0) || !(L > 0.0) || !(dist1 >= 0.0)) throw InvalidArgument("gamma: need a, L > 0 and dist1 >= 0");
  if (eta.joint) {
    const double c0 = std::min(0.5, B0);
    return (1.0 - delta) * eta.p0 * eta.n2_at_1 / (L * (dist1 + a * eta.C) + c0);
  }
  return (1.0 - delta) * eta.phi_prime0 * eta.xi / (2.0 * L * (dist1 + a * eta.C));
}

double zeta(double delta, double a, double mu, double gamma_value) {
  if (!in_open(delta, 0.5, 1.0)) throw InvalidArgument("zeta: delta must lie in (1/2, 1)");
  if (!(a > 0.0) || !(mu > 0.0) || !(gamma_value > 0.0)) throw InvalidArgument("zeta: a, mu and gamma must be positive");
  const double z = std::min(2.0 * delta - 1.0, a * mu * gamma_value / 2.0);
  if (!in_open(z, 0.0, 1.0)) throw NumericError("zeta: result left (0, 1)");
  return z;
}

double sign_power_tail_zeta(double mu, double L, std::size_t d, double eps) {
  return std::min(0.5, mu * (1.0 + eps) / (4.0 * L * std::sqrt(static_cast<double>(d)) * (2.0 + eps)));
}

double sign_power_tail_gamma(double a, double L, std::size_t d, double eps) {
  // a mu gamma / 2 = mu (1 - delta) (alpha - 1) / (L sqrt(d) alpha), delta = 3/4, alpha = 2 + eps.
  return 2.0 * 0.25 * (1.0 + eps) / (a * L * std::sqrt(static_cast<double>(d)) * (2.0 + eps));
}

NonconvexBound nonconvex_bound(const NonconvexInputs& in) {
  const double delta = in.delta;
  if (!in_open(delta, 2.0 / 3.0, 1.0)) throw InvalidArgument("nonconvex_bound: delta must lie in (2/3, 1)");
  if (!(in.t >= 1.0)) throw InvalidArgument("nonconvex_bound: t must be >= 1");
  if (!(in.beta > 0.0 && in.beta <= 1.0)) throw InvalidArgument("nonconvex_bound: beta must lie in (0, 1]");
  if (!(in.eta1 > 0.0) || !(in.eta2 > 0.0) || !(in.a > 0.0) || !(in.L > 0.0) || !(in.C > 0.0))
    throw InvalidArgument("nonconvex_bound: a, L, C, eta1 and eta2 must be positive");

  const double a = in.a, L = in.L, C = in.C, t = in.t;
  const double head = in.gap1 + std::log(1.0 / in.beta);
  const double c4 = a * a * a * C * C * C * C * L * L;
  NonconvexBound out;
  out.R1 = (1.0 - delta) * (head / a + a * L * C * C * (0.5 + 8.0 * L * in.DX) / (2.0 * delta - 1.0));
  out.R3 = head / (4.0 * a) + a * L * C * C * (0.25 + 4.0 * L * in.DX) + 32.0 * c4 * std::log(t + 1.0);
  const double d1 = std::pow(t + 2.0, 1.0 - delta) - std::pow(2.0, 1.0 - delta);

  if (std::abs(delta - 0.75) < 1e-12) {
    out.regime = 2;
    out.kappa = 0.25;
    const double den = std::pow(t + 2.0, 0.25) - std::pow(2.0, 0.25);
    const double lin = 2.0 * out.R3 / in.eta2 / den;
    const double sq = std::sqrt(2.0) * out.R3 / in.eta1 / den;
    out.value = lin + sq * sq;
  } else if (delta < 0.75) {
    out.regime = 1;
    out.kappa = std::min(1.0 - delta, 3.0 * delta - 2.0);
    out.R2 = 8.0 * c4 / ((1.0 - delta) * (3.0 - 4.0 * delta));
    const double d2 = std::pow(t + 2.0, 3.0 * delta - 2.0) - std::pow(2.0, 3.0 * delta - 2.0);
    const double s1 = 2.0 * out.R1 / in.eta1 / d1;
    const double s2 = 2.0 * out.R2 / in.eta1 / d2;
    out.value = 2.0 * out.R1 / in.eta2 / d1 + 2.0 * out.R2 / in.eta2 / d2 + s1 * s1 + s2 * s2;
  } else {
    out.regime = 3;
    out.kappa = 1.0 - delta;
    out.R4 = out.R1 + 8.0 * c4 / ((1.0 - delta) * (4.0 * delta - 3.0));
    const double sq = std::sqrt(2.0) * out.R4 / in.eta1 / d1;
    out.value = 2.0 * out.R4 / in.eta2 / d1 + sq * sq;
  }
  return out;
}

Neighborhood mixture_neighborhood(double lambda, double eta1, double eta2, double C) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw InvalidArgument("mixture_neighborhood: lambda must lie in [0, 1)");
  if (!(eta1 > 0.0) || !(eta2 > 0.0) || !(C > 0.0))
    throw InvalidArgument("mixture_neighborhood: eta1, eta2 and C must be positive");
  Neighborhood out;
  out.size = eta1 * lambda * C / (eta2 * eta2 * (1.0 - lambda));
  out.lambda_max = eta1 / (C + eta1);
  out.within_guarantee = lambda < out.lambda_max;
  return out;
}

CompetitorRates competitor_rates(double p) {
  if (!(p > 1.0 && p <= 2.0)) throw InvalidArgument("competitor_rates: p must lie in (1, 2]");
  CompetitorRates out;
  out.nonconvex_exp = 2.0 * (1.0 - p) / (3.0 * p - 2.0);
  out.strongly_convex_exp = 2.0 * (1.0 - p) / p;
  out.nonconvex_worse_than_quarter = p < 6.0 / 5.0;
  out.strongly_convex_worse_than_quarter = p < 8.0 / 7.0;
  return out;
}

namespace {

double log_component_constant(double alpha, double m, double d, const ProblemConstants& pc) {
  const double head = pc.gap1 + std::log(1.0 / pc.beta);
  const double a = pc.a, L = pc.L;
  const double num = d * head + a * a * d * d * m * m * L * (1.0 + L * pc.DX) +
                     std::pow(a, 4) * d * d * d * std::pow(m, 4) * L * L;
  return std::log(num) - std::log(a * (1.0 - std::pow(m + 1.0, -alpha)));
}

double log_joint_constant(double alpha, double M, double d, const ProblemConstants& pc) {
  const double head = pc.gap1 + std::log(1.0 / pc.beta);
  const double a = pc.a, L = pc.L;
  const double num = head + a * a * M * M * L * (1.0 + L * pc.DX) + std::pow(a, 4) * std::pow(M, 4) * L * L;
  return std::log(num) - std::log(a) - d * std::log(0.5 * (alpha - 1.0)) - std::log(std::min(1.0, M));
}

}  // namespace

DimensionComparison dimension_comparison(double alpha, double m, double M, std::size_t d, const ProblemConstants& pc) {
  if (!(alpha > 1.0)) throw InvalidArgument("dimension_comparison: alpha must be > 1");
  if (!(m > 1.0)) throw InvalidArgument("dimension_comparison: m must be > 1");
  if (!(M > 0.0)) throw InvalidArgument("dimension_comparison: M must be positive");
  if (d == 0) throw InvalidArgument("dimension_comparison: d must be positive");
  if (!(pc.a > 0.0) || !(pc.L > 0.0) || !(pc.beta > 0.0 && pc.beta <= 1.0))
    throw InvalidArgument("dimension_comparison: invalid problem constants");
  const auto dd = static_cast<double>(d);
  DimensionComparison out;
  out.component_scale = dd * dd * dd;
  out.joint_scale = std::pow(0.5 * (alpha - 1.0), -dd);
  out.component_constant = std::exp(log_component_constant(alpha, m, dd, pc));
  out.joint_constant = std::exp(log_joint_constant(alpha, M, dd, pc));
  for (std::size_t k = 1; k <= 10000; ++k) {
    const auto kd = static_cast<double>(k);
    if (log_joint_constant(alpha, M, kd, pc) > log_component_constant(alpha, m, kd, pc)) {
      out.crossover_d = k;
      break;
    }
  }
  return out;
}

SubGaussianCheck check_subgaussian(const EffectiveNoise& e, double C, std::size_t directions,
                                   const std::vector<double>& scales, std::uint64_t seed, double sigmas) {
  SubGaussianCheck out;
  out.norm_limit = 2.0 * C;
  const Eigen::Index n = e.e.cols();
  if (n < 2) throw InvalidArgument("check_subgaussian: need at least two samples");
  out.max_norm = e.e.colwise().norm().maxCoeff();
  out.norm_ok = out.max_norm <= out.norm_limit;
  RngStream rng(seed, 0x7367);
  Vector v(e.e.rows());
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < directions; ++k) {
    do {
      for (auto& vi : v) vi = rng.normal();
    } while (v.squaredNorm() == 0.0);
    v.normalize();
    const Vector proj = e.e.transpose() * v;
    for (double s : scales) {
      for (Eigen::Index i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = std::exp(s * proj[i]);
      const auto ms = stats::mean_std(vals);
      SubGaussianCheck::Entry entry;
      entry.scale = s;
      entry.estimate = ms.mean;
      entry.stderr_mc = ms.stderr_mean;
      entry.bound = std::exp(4.0 * C * C * s * s);
      entry.passed = entry.estimate <= entry.bound * (1.0 + sigmas * entry.stderr_mc / entry.estimate);
      if (!entry.passed) out.mgf_ok = false;
      out.mgf.push_back(entry);
    }
  }
  return out;
}

stats::MeanStd phi_prime_mc(const NonlinearMap& nonlinearity, const NoiseModel& noise, double h, std::size_t n,
                            RngStream& rng) {
  if (!(h > 0.0)) throw InvalidArgument("phi_prime_mc: h must be positive");
  if (n < 2) throw InvalidArgument("phi_prime_mc: n must be >= 2");
  const auto d = static_cast<Eigen::Index>(nonlinearity.dim());
  Vector z(d), up(d), down(d), pu(d), pd(d);
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    noise.sample(rng, z);
    up = z;
    down = z;
    up[0] += h;
    down[0] -= h;
    nonlinearity.apply(up, pu);
    nonlinearity.apply(down, pd);
    vals[i] = (pu[0] - pd[0]) / (2.0 * h);
  }
  return stats::mean_std(vals);
}

void TheoryReport::add(const std::string& key, double value) { entries.emplace_back(key, stats::format_double(value)); }
void TheoryReport::add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }

const std::string* TheoryReport::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

std::string TheoryReport::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  return out;
}

std::string TheoryReport::to_csv() const {
  std::string out = "key,value\n";
  for (const auto& [k, v] : entries) {
    const bool quote = v.find(',') != std::string::npos;
    out += k + "," + (quote ? "\"" + v + "\"" : v) + "\n";
  }
  return out;
}

TheoryReport build_report(const ReportInputs& in) {
  if (!in.nonlinearity || !in.noise) throw InvalidArgument("build_report: nonlinearity and noise are required");
  const NonlinearMap& psi = *in.nonlinearity;
  const NoiseModel& noise = *in.noise;
  const NoiseModel& sym = symmetric_part(noise);
  TheoryReport r;
  r.add("nonlinearity", psi.name());
  r.add("noise", noise.name());
  r.add("dim", static_cast<double>(psi.dim()));

  EtaConstants eta;
  try {
    eta = eta_constants(psi, noise);
  } catch (const Unsupported&) {
    RngStream rng(in.fit_seed, 0x6669);
    const auto grid = log_grid(psi.dim(), in.fit_points, 1e-2, 1e2, in.fit_seed);
    eta = fitted_eta(psi, verify_huber(psi, sym, grid, in.fit_n_mc, rng, std::nullopt));
  }
  double B0 = 1.0;
  try {
    B0 = sym.positivity_radius();
  } catch (const Unsupported&) {
  }

  r.add("C", eta.C);
  r.add("eta_provenance", to_string(eta.provenance));
  r.add("eta1", eta.eta1);
  r.add("eta2", eta.eta2);
  if (eta.joint) {
    r.add("p0", eta.p0);
    r.add("N2(1)", eta.n2_at_1);
    r.add("B0", B0);
    r.add("C0", std::min(0.5, B0));
  } else {
    r.add("phi_prime0", eta.phi_prime0);
    r.add("xi", eta.xi);
  }

  if (in_open(in.delta, 0.5, 1.0)) {
    const double g = gamma(in.a, in.delta, eta, in.L, in.dist1, B0);
    r.add("gamma", g);
    if (in.mu) r.add("zeta", zeta(in.delta, in.a, *in.mu, g));
    const auto* pt = std::get_if<noise::PowerTail>(&sym.variant());
    if (in.mu && pt && std::holds_alternative<nonlin::Sign>(psi.variant()) && pt->alpha > 2.0 && pt->alpha <= 3.0 &&
        std::abs(in.delta - 0.75) < 1e-12)
      r.add("zeta_sign_closed_form", sign_power_tail_zeta(*in.mu, in.L, psi.dim(), pt->alpha - 2.0));
  }

  if (in_open(in.delta, 2.0 / 3.0, 1.0)) {
    NonconvexInputs nc;
    nc.t = in.t;
    nc.beta = in.beta;
    nc.delta = in.delta;
    nc.a = in.a;
    nc.L = in.L;
    nc.C = eta.C;
    nc.eta1 = eta.eta1;
    nc.eta2 = eta.eta2;
    nc.gap1 = in.gap1;
    nc.DX = in.DX;
    const auto b = nonconvex_bound(nc);
    r.add("regime", static_cast<double>(b.regime));
    r.add("kappa", b.kappa);
    r.add("R1", b.R1);
    if (b.regime == 1) r.add("R2", b.R2);
    r.add("R3", b.R3);
    if (b.regime == 3) r.add("R4", b.R4);
    r.add("t", in.t);
    r.add("beta", in.beta);
    r.add("nonconvex_bound", b.value);
  } else {
    r.add("rate_guarantee", "none");
  }

  if (const auto* mix = std::get_if<noise::Mixture>(&noise.variant())) {
    const auto nb = mixture_neighborhood(mix->lambda, eta.eta1, eta.eta2, eta.C);
    r.add("lambda", mix->lambda);
    r.add("neighborhood_size", nb.size);
    r.add("lambda_max", nb.lambda_max);
    r.add("lambda_within_guarantee", nb.within_guarantee ? "true" : "false");
  }

  const auto cr = competitor_rates(in.competitor_p);
  r.add("competitor_p", in.competitor_p);
  r.add("competitor_nonconvex_exp", cr.nonconvex_exp);
  r.add("competitor_strongly_convex_exp", cr.strongly_convex_exp);
  return r;
}

}  // namespace nlsgd::theory
