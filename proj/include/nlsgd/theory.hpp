#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlsgd/noise.hpp"
#include "nlsgd/nonlinearity.hpp"
#include "nlsgd/optimizer.hpp"

namespace nlsgd::theory {

enum class Provenance { Analytic, Approximate, Fitted };
std::string to_string(Provenance p);

struct EtaConstants {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double C = 0.0;
  bool joint = false;
  // Component-wise pairs.
  double phi_prime0 = 0.0;
  double xi = 0.0;
  // Joint pairs.
  double p0 = 0.0;
  double n2_at_1 = 0.0;
  Provenance provenance = Provenance::Analytic;
};

/// Closed-form (eta1, eta2) for Sign, CompClip(m > 1) and JointClip under
/// PowerTail noise. A mixture is reduced to its symmetric component. Other
/// pairs throw Unsupported; use verify_huber's fit instead.
EtaConstants eta_constants(const NonlinearMap& nonlinearity, const NoiseModel& noise);

struct HuberPoint {
  double norm = 0.0;
  double estimate = 0.0;  // MC mean of <Psi(x + z), x>
  double stderr_mc = 0.0;
  double bound = 0.0;  // min{eta1 |x|, eta2 |x|^2}
  bool passed = true;
};

struct HuberReport {
  std::vector<HuberPoint> points;
  std::size_t violations = 0;
  double fitted_eta1 = 0.0;
  double fitted_eta2 = 0.0;
  bool fit_ok = false;
};

/// Points with norms log-spaced on [lo, hi] and random unit directions.
std::vector<Vector> log_grid(std::size_t dim, std::size_t count, double lo, double hi, std::uint64_t seed);

/// Checks <Phi(x), x> >= min{eta1 |x|, eta2 |x|^2} - 3 stderr at every grid
/// point. Without `eta` only the fit is produced.
HuberReport verify_huber(const NonlinearMap& nonlinearity, const NoiseModel& noise, const std::vector<Vector>& grid,
                         std::size_t n_mc, RngStream& rng, std::optional<EtaConstants> eta);

/// EtaConstants from a verify_huber fit, tagged Fitted.
EtaConstants fitted_eta(const NonlinearMap& nonlinearity, const HuberReport& report);

/// Component: (1 - delta) phi'(0) xi / (2 L (dist1 + a C)).
/// Joint: (1 - delta) p0 N2(1) / (L (dist1 + a C) + min{0.5, B0}).
double gamma(double a, double delta, const EtaConstants& eta, double L, double dist1, double B0 = 1.0);

/// min{2 delta - 1, a mu gamma / 2}.
double zeta(double delta, double a, double mu, double gamma);

/// Sign / PowerTail(2 + eps) at delta = 3/4 with dist1 = 0:
/// min{1/2, mu (1 + eps) / (4 L sqrt(d) (2 + eps))}.
double sign_power_tail_zeta(double mu, double L, std::size_t d, double eps);
/// The gamma for which zeta(3/4, a, mu, gamma) equals sign_power_tail_zeta.
double sign_power_tail_gamma(double a, double L, std::size_t d, double eps);

struct NonconvexInputs {
  double t = 1.0;
  double beta = 0.05;
  double delta = 0.75;
  double a = 1.0;
  double L = 1.0;
  double C = 1.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
  double gap1 = 0.0;  // f(x1) - f*
  double DX = 0.0;
};

struct NonconvexBound {
  double value = 0.0;
  int regime = 0;  // 1: delta < 3/4, 2: delta = 3/4, 3: delta > 3/4
  double kappa = 0.0;  // rate exponent of the leading term
  double R1 = 0.0, R2 = 0.0, R3 = 0.0, R4 = 0.0;
};

/// High-probability bound on min_{k<=t} |grad f(x(k))|^2 for delta in (2/3, 1).
NonconvexBound nonconvex_bound(const NonconvexInputs& in);

struct Neighborhood {
  double size = 0.0;
  double lambda_max = 0.0;
  bool within_guarantee = true;
};

Neighborhood mixture_neighborhood(double lambda, double eta1, double eta2, double C);

struct CompetitorRates {
  double nonconvex_exp = 0.0;
  double strongly_convex_exp = 0.0;
  bool nonconvex_worse_than_quarter = false;        // p < 6/5
  bool strongly_convex_worse_than_quarter = false;  // p < 8/7
};

CompetitorRates competitor_rates(double p);

struct DimensionComparison {
  double component_scale = 0.0;  // d^3
  double joint_scale = 0.0;      // ((alpha - 1) / 2)^-d
  double component_constant = 0.0;
  double joint_constant = 0.0;
  std::size_t crossover_d = 0;  // first d with joint_constant > component_constant, 0 if none up to 10^4
};

struct ProblemConstants {
  double gap1 = 1.0;
  double beta = 0.05;
  double a = 1.0;
  double L = 1.0;
  double DX = 1.0;
};

DimensionComparison dimension_comparison(double alpha, double m, double M, std::size_t d,
                                         const ProblemConstants& pc = {});

struct SubGaussianCheck {
  double max_norm = 0.0;
  double norm_limit = 0.0;  // 2C
  bool norm_ok = true;
  struct Entry {
    double scale = 0.0;
    double estimate = 0.0;
    double stderr_mc = 0.0;
    double bound = 0.0;
    bool passed = true;
  };
  std::vector<Entry> mgf;
  bool mgf_ok = true;
};

/// |e_i| <= 2C for every sample and E exp(s <v, e>) <= exp(4 C^2 s^2) (1 + sigmas stderr)
/// over `directions` random unit v and each scale s.
SubGaussianCheck check_subgaussian(const EffectiveNoise& e, double C, std::size_t directions,
                                   const std::vector<double>& scales, std::uint64_t seed, double sigmas = 5.0);

/// (Phi(h e1) - Phi(-h e1))_1 / 2h with common random numbers.
stats::MeanStd phi_prime_mc(const NonlinearMap& nonlinearity, const NoiseModel& noise, double h, std::size_t n,
                            RngStream& rng);

struct ReportInputs {
  const NonlinearMap* nonlinearity = nullptr;
  const NoiseModel* noise = nullptr;
  double L = 1.0;
  std::optional<double> mu;
  double dist1 = 0.0;
  double gap1 = 0.0;
  double DX = 0.0;
  double a = 1.0;
  double delta = 0.75;
  double beta = 0.05;
  double t = 1e4;
  double competitor_p = 1.5;
  // Used only when the pair has no closed form.
  std::size_t fit_points = 50;
  std::size_t fit_n_mc = 10000;
  std::uint64_t fit_seed = 1;
};

/// Ordered key/value pairs; values are text so that provenance and regime
/// tags can sit alongside numbers.
struct TheoryReport {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, double value);
  void add(const std::string& key, const std::string& value);
  const std::string* find(const std::string& key) const;
  std::string to_text() const;
  std::string to_csv() const;
};

TheoryReport build_report(const ReportInputs& in);

}  // namespace nlsgd::theory
