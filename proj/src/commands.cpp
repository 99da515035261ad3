#include <sstream>

#include "nlsgd/error.hpp"
#include "nlsgd/harness.hpp"

namespace nlsgd {

namespace {

const NoiseModel& symmetric_component(const NoiseModel& noise) {
  if (const auto* m = std::get_if<noise::Mixture>(&noise.variant())) return *m->symmetric;
  return noise;
}

std::string pass_fail(bool ok) { return ok ? "pass" : "fail"; }

void add_self_test(VerifyResult& out, const std::string& key, const NoiseModel& model, std::size_t n,
                   std::uint64_t seed) {
  RngStream rng(seed, 0x73656c66);
  const auto rep = self_test(model, n, rng);
  std::ostringstream os;
  os << pass_fail(rep.passed) << " ks_target=" << rep.ks_target;
  if (!rep.ks.empty()) {
    double min_p = 1.0, max_d = 0.0;
    for (const auto& k : rep.ks) {
      min_p = std::min(min_p, k.p_value);
      max_d = std::max(max_d, k.statistic);
    }
    os << " ks_tests=" << rep.ks.size() << " min_p=" << stats::format_double(min_p)
       << " max_D=" << stats::format_double(max_d) << " p_threshold=" << stats::format_double(rep.ks_threshold);
  }
  if (rep.symmetry_checked)
    os << " symmetry=" << stats::format_double(rep.symmetry_statistic)
       << " symmetry_threshold=" << stats::format_double(rep.symmetry_threshold);
  out.lines.emplace_back(key, os.str());
  out.passed = out.passed && rep.passed;
}

}  // namespace

theory::TheoryReport theory_for_arm(const ExperimentConfig& config, const ArmSpec& arm) {
  const Problem problem = build_problem(config.problem);
  const NoiseModel noise = build_noise(config.noise, config.problem.dim);
  const NonlinearMap psi = build_nonlinearity(arm.nonlinearity, config.problem.dim);
  const Vector x1 = build_x1(config);
  theory::ReportInputs in;
  in.nonlinearity = &psi;
  in.noise = &noise;
  in.L = problem.L();
  in.mu = problem.mu();
  in.dist1 = (x1 - *problem.x_star()).norm();
  in.gap1 = problem.gap(x1);
  in.DX = in.dist1 * in.dist1;
  in.a = arm.schedule.a;
  in.delta = arm.schedule.delta;
  in.t = static_cast<double>(config.T);
  in.fit_points = config.verify.huber_points;
  in.fit_n_mc = std::min<std::size_t>(config.verify.huber_n_mc, 10000);
  in.fit_seed = config.seed;
  auto report = theory::build_report(in);
  report.entries.insert(report.entries.begin(), {"arm", arm.name});
  return report;
}

VerifyResult verify_config(const ExperimentConfig& config, const std::string& arm_filter) {
  const Problem problem = build_problem(config.problem);
  const NoiseModel noise = build_noise(config.noise, config.problem.dim);
  const NoiseModel& sym = symmetric_component(noise);
  const auto& v = config.verify;
  const Vector g1 = problem.grad(build_x1(config));
  VerifyResult out;
  bool any = false;
  for (const auto& arm : config.arms) {
    if (!arm_filter.empty() && arm.name != arm_filter) continue;
    any = true;
    const NonlinearMap psi = build_nonlinearity(arm.nonlinearity, config.problem.dim);
    const std::string pre = "arm." + arm.name + ".";

    const auto axioms = check_axioms(psi, v.axiom_samples, config.seed);
    std::string ax = pass_fail(axioms.all_passed());
    for (const auto& c : axioms.checks)
      if (!c.passed) ax += " " + c.axiom + ": " + c.witness;
    out.lines.emplace_back(pre + "axioms", ax);
    out.passed = out.passed && axioms.all_passed();

    try {
      const auto eta = theory::eta_constants(psi, sym);
      const auto grid = theory::log_grid(psi.dim(), v.huber_points, 1e-2, 1e2, config.seed);
      RngStream rng(config.seed, 0x68756272);
      const auto rep = theory::verify_huber(psi, sym, grid, v.huber_n_mc, rng, eta);
      std::ostringstream os;
      os << pass_fail(rep.violations == 0) << " violations=" << rep.violations << "/" << rep.points.size()
         << " eta1=" << stats::format_double(eta.eta1) << " eta2=" << stats::format_double(eta.eta2);
      out.lines.emplace_back(pre + "huber", os.str());
      out.passed = out.passed && rep.violations == 0;
    } catch (const Error& e) {
      out.lines.emplace_back(pre + "huber", std::string("skipped: ") + e.what());
    }

    RngStream erng(config.seed, 0x65666e73);
    const auto eff = effective_noise(psi, noise, g1, std::max<std::size_t>(v.effective_n, 1000), erng);
    const auto sg = theory::check_subgaussian(eff, psi.uniform_bound(), v.mgf_directions, {0.1, 1.0}, config.seed);
    std::ostringstream os;
    os << pass_fail(sg.norm_ok) << " max_norm=" << stats::format_double(sg.max_norm)
       << " limit=" << stats::format_double(sg.norm_limit);
    out.lines.emplace_back(pre + "effective_noise_norm", os.str());
    double worst = 0.0;
    for (const auto& m : sg.mgf) worst = std::max(worst, m.estimate / m.bound);
    out.lines.emplace_back(pre + "effective_noise_mgf",
                           pass_fail(sg.mgf_ok) + " checks=" + std::to_string(sg.mgf.size()) +
                               " max_ratio=" + stats::format_double(worst));
    out.passed = out.passed && sg.norm_ok && sg.mgf_ok;
  }
  if (!any) throw ConfigError(arm_filter.empty() ? "config defines no [arm] sections" : "no arm named '" + arm_filter + "'");

  add_self_test(out, "noise.self_test", noise, std::max<std::size_t>(v.selftest_n, 1000), config.seed);
  if (const auto* m = std::get_if<noise::Mixture>(&noise.variant())) {
    add_self_test(out, "noise.symmetric.self_test", *m->symmetric, std::max<std::size_t>(v.selftest_n, 1000),
                  config.seed + 1);
    add_self_test(out, "noise.nonsymmetric.self_test", *m->nonsymmetric, std::max<std::size_t>(v.selftest_n, 1000),
                  config.seed + 2);
  }
  return out;
}

}  // namespace nlsgd
