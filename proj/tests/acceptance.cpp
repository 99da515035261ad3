// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "nlsgd/config.hpp"
#include "nlsgd/error.hpp"
#include "nlsgd/harness.hpp"
#include "nlsgd/theory.hpp"

using namespace nlsgd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g(double v) { return fmt("%.4g", v); }

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!out.passed) ++failures;
  std::printf("%s %2d %s: %s [%.1fs]\n", out.passed ? "PASS" : "FAIL", id, name, out.detail.c_str(), secs);
  std::fflush(stdout);
}

// The d = 100 runs are shared by criteria 1 and 2.
struct HeavyTail {
  std::vector<double> final_mse;
  std::vector<double> final_tail;
  std::vector<std::string> arms;
};

const HeavyTail& heavy_tail() {
  static const HeavyTail data = [] {
    const auto cfg = load_config(std::string(NLSGD_CONFIG_DIR) + "/heavy_tail_d100.cfg");
    const Problem problem = build_problem(cfg.problem);
    const NoiseModel noise = build_noise(cfg.noise, cfg.problem.dim);
    HeavyTail f;
    for (const auto& arm : cfg.arms) {
      const auto runs = run_arm(cfg, arm, problem, noise);
      f.arms.push_back(arm.name);
      f.final_mse.push_back(mse_curve(runs).values.back());
      f.final_tail.push_back(tail_probability(runs, 0.1, {runs.t.back()}, cfg.bootstrap_n, cfg.seed).values.back());
    }
    return f;
  }();
  return data;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  criterion(1, "mse_ordering_d100", [] {
    const auto& f = heavy_tail();
    const double sign = f.final_mse[0], comp = f.final_mse[1], joint = f.final_mse[2];
    const bool sign_ok = sign < comp || std::max(sign, comp) <= 2.0 * std::min(sign, comp);
    const bool ok = sign_ok && comp <= joint && joint > 5.0 * sign;
    return Outcome{ok, "final MSE sign=" + g(sign) + " comp_clip=" + g(comp) + " joint_clip=" + g(joint) +
                           " joint/sign=" + g(joint / sign)};
  });

  criterion(2, "tail_decay_d100", [] {
    const auto& f = heavy_tail();
    const bool ok = f.final_tail[0] < 0.01 && f.final_tail[1] < 0.01 && f.final_tail[2] > 0.5;
    return Outcome{ok, "P(|x-x*|^2>0.1) at T: sign=" + g(f.final_tail[0]) + " comp_clip=" + g(f.final_tail[1]) +
                           " joint_clip=" + g(f.final_tail[2])};
  });

  criterion(3, "inner_product_lower_bound", [] {
    struct Pair {
      NonlinearMap psi;
      NoiseModel noise;
    };
    const std::vector<Pair> pairs{
        {NonlinearMap::sign(1), NoiseModel::power_tail(1, 2.05)},
        {NonlinearMap::sign(10), NoiseModel::power_tail(10, 3.0)},
        {NonlinearMap::comp_clip(1, 2.0), NoiseModel::power_tail(1, 2.05)},
        {NonlinearMap::comp_clip(10, 2.0), NoiseModel::power_tail(10, 3.0)},
        {NonlinearMap::joint_clip(2, 1.0), NoiseModel::power_tail(2, 3.0)},
        {NonlinearMap::joint_clip(10, 100.0), NoiseModel::power_tail(10, 3.0)},
    };
    bool ok = true;
    std::string detail;
    std::uint64_t seed = 0x68756272;
    for (const auto& p : pairs) {
      RngStream rng(seed++, 0);
      const auto grid = theory::log_grid(p.psi.dim(), 50, 1e-2, 1e2, seed);
      const auto rep = theory::verify_huber(p.psi, p.noise, grid, 100000, rng, theory::eta_constants(p.psi, p.noise));
      ok = ok && rep.violations == 0;
      detail += (detail.empty() ? "" : " ") + p.psi.name() + "/" + p.noise.name() + "/d=" +
                std::to_string(p.psi.dim()) + ":" + std::to_string(rep.violations) + "/50";
    }
    return Outcome{ok, "violations " + detail};
  });

  criterion(4, "effective_noise_bounds", [] {
    const std::size_t d = 10;
    const auto noise = NoiseModel::power_tail(d, 2.05);
    const Vector x = Vector::Constant(d, 0.3);
    bool ok = true;
    std::string detail;
    RngStream rng(0x65666e73, 0);
    for (const auto& psi : {NonlinearMap::sign(d), NonlinearMap::comp_clip(d, 2.0), NonlinearMap::joint_clip(d, 1.0)}) {
      const double C = psi.uniform_bound();
      const auto e = effective_noise(psi, noise, x, 1000000, rng);
      const auto chk = theory::check_subgaussian(e, C, 20, {0.1 / C, 1.0 / C}, 0x7367, 5.0);
      ok = ok && chk.norm_ok && chk.mgf_ok && chk.mgf.size() == 40;
      double worst = 0.0;
      for (const auto& m : chk.mgf) worst = std::max(worst, m.estimate / m.bound);
      detail += (detail.empty() ? "" : " ") + psi.name() + ": max|e|/2C=" + g(chk.max_norm / chk.norm_limit) +
                " max mgf/bound=" + g(worst);
    }
    return Outcome{ok, detail};
  });

  criterion(5, "phi_prime_zero", [] {
    bool ok = true;
    std::string detail;
    for (double alpha : {2.05, 3.0, 5.0}) {
      RngStream rng(0x706869, static_cast<std::uint64_t>(alpha * 100));
      const auto est = theory::phi_prime_mc(NonlinearMap::sign(1), NoiseModel::power_tail(1, alpha), 1e-3, 10000000, rng);
      const double rel = std::abs(est.mean - (alpha - 1.0)) / (alpha - 1.0);
      ok = ok && rel < 0.05;
      detail += (detail.empty() ? "" : " ") + ("alpha=" + g(alpha)) + ": " + g(est.mean) + " (rel " + g(rel) + ")";
    }
    return Outcome{ok, detail};
  });

  criterion(6, "rate_exponents", [] {
    const double nc = theory::competitor_rates(6.0 / 5.0).nonconvex_exp;
    const double sc = theory::competitor_rates(8.0 / 7.0).strongly_convex_exp;
    bool ok = std::abs(nc + 0.25) <= 1e-12 && std::abs(sc + 0.25) <= 1e-12;
    double worst = 0.0;
    for (double eps : {0.01, 0.05, 0.5, 1.0})
      for (std::size_t d : {1u, 10u, 100u})
        for (double mu : {0.1, 1.0})
          for (double L : {1.0, 10.0}) {
            const double closed = std::min(0.5, mu * (1.0 + eps) / (4.0 * L * std::sqrt(double(d)) * (2.0 + eps)));
            const double z = theory::zeta(0.75, 1.0, mu, theory::sign_power_tail_gamma(1.0, L, d, eps));
            worst = std::max(worst, std::abs(z - closed) / closed);
            worst = std::max(worst, std::abs(theory::sign_power_tail_zeta(mu, L, d, eps) - closed) / closed);
          }
    ok = ok && worst <= 1e-14;
    return Outcome{ok, "nonconvex(6/5)=" + fmt("%.17g", nc) + " strongly_convex(8/7)=" + fmt("%.17g", sc) +
                           " zeta max rel err=" + g(worst)};
  });

  criterion(7, "empirical_rate_weighted_average", [] {
    const auto cfg = load_config(std::string(NLSGD_CONFIG_DIR) + "/rate.cfg");
    const Problem problem = build_problem(cfg.problem);
    const NoiseModel noise = build_noise(cfg.noise, cfg.problem.dim);
    const auto runs = run_arm(cfg, cfg.arms.front(), problem, noise);
    const auto fit = slope_fit(mean_curve(runs, "wavg_dist2"), 1e3, 1e4);
    const bool ok = fit.slope >= -0.6 && fit.slope <= -0.15;
    return Outcome{ok, "slope=" + g(fit.slope) + " r2=" + g(fit.r_squared)};
  });

  criterion(8, "mixture_neighborhood", [] {
    const std::size_t d = 5;
    const double alpha = 3.0;
    const auto psi = NonlinearMap::sign(d);
    const auto sym = NoiseModel::power_tail(d, alpha);
    const auto eta = theory::eta_constants(psi, sym);
    const double lambda = 0.5 * theory::mixture_neighborhood(0.0, eta.eta1, eta.eta2, eta.C).lambda_max;
    const Problem problem(problem::Quadratic{Matrix::Identity(d, d), -0.1 * Vector::Ones(d)});
    const std::uint64_t T = 100000, R = 10;
    auto prefix_min = [&](const NoiseModel& noise) {
      std::vector<double> mean;
      std::vector<std::uint64_t> t;
      for (std::uint64_t r = 0; r < R; ++r) {
        RunConfig rc;
        rc.problem = &problem;
        rc.nonlinearity = &psi;
        rc.noise = &noise;
        rc.schedule = {0.2, 0.9};
        rc.x1 = Vector::Zero(d);
        rc.T = T;
        rc.seed = 0x6d6978 + r;
        rc.record.stride = 1000;
        rc.record.dist2 = false;
        rc.record.min_gradnorm2 = true;
        const auto tr = run(rc);
        const auto& v = tr.at("min_gradnorm2");
        if (mean.empty()) {
          mean.assign(v.size(), 0.0);
          t = tr.t;
        }
        for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i] / double(R);
      }
      return std::make_pair(t, mean);
    };
    const auto mixed = NoiseModel::mixture(lambda, sym, NoiseModel::shifted(sym, 1.0));
    const auto [t, biased] = prefix_min(mixed);
    const auto [t0, clean] = prefix_min(NoiseModel::mixture(0.0, sym, NoiseModel::shifted(sym, 1.0)));
    // Plateau: positive, and the last decade shrinks it by less than half.
    std::size_t tenth = 0;
    while (t[tenth] < T / 10) ++tenth;
    const double plateau = biased.back();
    const bool plateau_ok = plateau > 0.0 && plateau >= 0.5 * biased[tenth];
    const double ratio = clean.back() / plateau;
    const bool ok = plateau_ok && ratio < 1e-3;
    return Outcome{ok, "lambda=" + g(lambda) + " plateau=" + g(plateau) + " (t=T/10: " + g(biased[tenth]) +
                           ") lambda0=" + g(clean.back()) + " ratio=" + g(ratio) + " need <1e-3"};
  });

  criterion(9, "sampler_correctness", [] {
    SelfTestOptions opts;
    opts.bonferroni = false;
    bool ok = true;
    std::string detail;
    RngStream rng(0x73656c66, 0);
    for (const auto& m : {NoiseModel::power_tail(1, 2.05), NoiseModel::power_tail(1, 3.0), NoiseModel::cauchy(1)}) {
      const auto rep = self_test(m, 100000, rng, opts);
      ok = ok && rep.passed && rep.symmetry_checked && rep.ks.size() == 1 && rep.ks[0].p_value > 0.01 &&
           rep.symmetry_statistic < 4.0 / std::sqrt(1e5);
      detail += (detail.empty() ? "" : " ") + m.name() + ": p=" + g(rep.ks[0].p_value) +
                " sym=" + g(rep.symmetry_statistic);
    }
    return Outcome{ok, detail + " (sym limit " + g(4.0 / std::sqrt(1e5)) + ")"};
  });

  criterion(10, "determinism", [] {
    const fs::path work = fs::temp_directory_path() / "nlsgd_acceptance_determinism";
    fs::remove_all(work);
    const std::string cfg = std::string(NLSGD_CONFIG_DIR) + "/smoke.cfg";
    for (const char* run : {"a", "b"}) {
      const std::string cmd = std::string("\"") + NLSGD_CLI_PATH + "\" simulate --config \"" + cfg + "\" --out \"" +
                              (work / run).string() + "\"";
      if (std::system(cmd.c_str()) != 0) return Outcome{false, "simulate failed: " + cmd};
    }
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(work / "a")) {
      if (entry.path().extension() != ".csv") continue;
      ++n;
      const auto other = work / "b" / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
        return Outcome{false, entry.path().filename().string() + " differs"};
    }
    fs::remove_all(work);
    return Outcome{n > 0, std::to_string(n) + " csv files byte-identical"};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
