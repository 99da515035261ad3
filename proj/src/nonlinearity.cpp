#include "nlsgd/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlsgd/error.hpp"
#include "nlsgd/rng.hpp"
#include "nlsgd/stats.hpp"

namespace nlsgd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kAxiomTol = 1e-12;

double sign_of(double x) noexcept { return (x > 0.0) - (x < 0.0); }

void validate(const nonlin::CompQuant& q) {
  const auto& bp = q.breakpoints;
  const auto& r = q.values;
  if (r.size() != bp.size() + 1)
    throw InvalidArgument("CompQuant: need exactly one more value than breakpoints");
  if (!(q.bound > 0.0)) throw InvalidArgument("CompQuant: bound R must be positive");
  for (std::size_t i = 1; i < bp.size(); ++i)
    if (!(bp[i] > bp[i - 1])) throw InvalidArgument("CompQuant: breakpoints must be strictly increasing");
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i] < r[i - 1]) throw InvalidArgument("CompQuant: values must be non-decreasing");
  for (double v : r)
    if (!(std::abs(v) < q.bound)) throw InvalidArgument("CompQuant: every |r_j| must be < R");
  const std::size_t nb = bp.size();
  for (std::size_t i = 0; i < nb; ++i)
    if (std::abs(bp[i] + bp[nb - 1 - i]) > kAxiomTol)
      throw InvalidArgument("CompQuant: breakpoints must be symmetric about 0");
  for (std::size_t j = 0; j < r.size(); ++j)
    if (std::abs(r[j] + r[r.size() - 1 - j]) > kAxiomTol)
      throw InvalidArgument("CompQuant: values must be odd-symmetric");
}

double quantize(const nonlin::CompQuant& q, double x) {
  if (x == 0.0) return 0.0;
  const auto it = std::lower_bound(q.breakpoints.begin(), q.breakpoints.end(), x);
  return q.values[static_cast<std::size_t>(it - q.breakpoints.begin())];
}

}  // namespace

NonlinearMap::NonlinearMap(nonlin::Variant variant, std::size_t dim)
    : variant_(std::move(variant)), dim_(dim) {
  if (dim_ == 0) throw InvalidArgument("NonlinearMap: dimension must be positive");
  std::visit(overloaded{
                 [](const nonlin::Sign&) {},
                 [](const nonlin::Normalize&) {},
                 [](const nonlin::CompClip& c) {
                   if (!(c.m > 0.0) || !std::isfinite(c.m))
                     throw InvalidArgument("CompClip: threshold m must be positive");
                 },
                 [](const nonlin::JointClip& c) {
                   if (!(c.M > 0.0) || !std::isfinite(c.M))
                     throw InvalidArgument("JointClip: threshold M must be positive");
                 },
                 [](const nonlin::CompQuant& q) { validate(q); },
             },
             variant_);
}

NonlinearMap NonlinearMap::sign(std::size_t dim) { return {nonlin::Sign{}, dim}; }
NonlinearMap NonlinearMap::comp_clip(std::size_t dim, double m) { return {nonlin::CompClip{m}, dim}; }
NonlinearMap NonlinearMap::normalize(std::size_t dim) { return {nonlin::Normalize{}, dim}; }
NonlinearMap NonlinearMap::joint_clip(std::size_t dim, double M) { return {nonlin::JointClip{M}, dim}; }

NonlinearMap NonlinearMap::uniform_quantizer(std::size_t dim, std::size_t levels, double range) {
  if (levels < 2 || levels % 2 != 0)
    throw InvalidArgument("uniform_quantizer: levels must be even and >= 2");
  if (!(range > 0.0)) throw InvalidArgument("uniform_quantizer: range must be positive");
  const double step = 2.0 * range / static_cast<double>(levels);
  const auto half = static_cast<double>(levels) / 2.0;
  nonlin::CompQuant q;
  q.bound = range;
  for (std::size_t j = 1; j < levels; ++j) q.breakpoints.push_back((static_cast<double>(j) - half) * step);
  for (std::size_t j = 0; j < levels; ++j) q.values.push_back((static_cast<double>(j) - half + 0.5) * step);
  return {std::move(q), dim};
}

bool NonlinearMap::is_component_wise() const noexcept {
  return std::holds_alternative<nonlin::Sign>(variant_) ||
         std::holds_alternative<nonlin::CompClip>(variant_) ||
         std::holds_alternative<nonlin::CompQuant>(variant_);
}

std::string NonlinearMap::name() const {
  return std::visit(overloaded{
                        [](const nonlin::Sign&) -> std::string { return "sign"; },
                        [](const nonlin::CompClip& c) { return "comp_clip(m=" + stats::format_double(c.m) + ")"; },
                        [](const nonlin::CompQuant& q) {
                          return "comp_quant(levels=" + std::to_string(q.values.size()) +
                                 ",R=" + stats::format_double(q.bound) + ")";
                        },
                        [](const nonlin::Normalize&) -> std::string { return "normalize"; },
                        [](const nonlin::JointClip& c) { return "joint_clip(M=" + stats::format_double(c.M) + ")"; },
                    },
                    variant_);
}

double NonlinearMap::component(double x) const {
  return std::visit(overloaded{
                        [x](const nonlin::Sign&) { return sign_of(x); },
                        [x](const nonlin::CompClip& c) { return std::clamp(x, -c.m, c.m); },
                        [x](const nonlin::CompQuant& q) { return quantize(q, x); },
                        [](const auto&) -> double {
                          throw Unsupported("component(): map is not component-wise");
                        },
                    },
                    variant_);
}

double NonlinearMap::joint_factor(double norm) const {
  return std::visit(overloaded{
                        [norm](const nonlin::Normalize&) { return norm > 0.0 ? 1.0 / norm : 0.0; },
                        [norm](const nonlin::JointClip& c) { return norm > c.M ? c.M / norm : 1.0; },
                        [](const auto&) -> double {
                          throw Unsupported("joint_factor(): map is not joint");
                        },
                    },
                    variant_);
}

void NonlinearMap::apply(ConstVectorRef x, VectorRef out) const {
  if (static_cast<std::size_t>(x.size()) != dim_ || static_cast<std::size_t>(out.size()) != dim_)
    throw InvalidArgument("apply: dimension mismatch (map dim " + std::to_string(dim_) +
                          ", input " + std::to_string(x.size()) + ")");
  std::visit(overloaded{
                 [&](const nonlin::Sign&) {
                   for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = sign_of(x[i]);
                 },
                 [&](const nonlin::CompClip& c) { out = x.cwiseMax(-c.m).cwiseMin(c.m); },
                 [&](const nonlin::CompQuant& q) {
                   for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = quantize(q, x[i]);
                 },
                 [&](const nonlin::Normalize&) {
                   const double n = x.norm();
                   if (n > 0.0)
                     out = x / n;
                   else
                     out.setZero();
                 },
                 [&](const nonlin::JointClip& c) {
                   const double n = x.norm();
                   if (n > c.M)
                     out = x * (c.M / n);
                   else
                     out = x;
                 },
             },
             variant_);
}

Vector NonlinearMap::apply(ConstVectorRef x) const {
  Vector out(static_cast<Eigen::Index>(dim_));
  apply(x, out);
  return out;
}

double NonlinearMap::scalar_bound() const {
  return std::visit(overloaded{
                        [](const nonlin::Sign&) { return 1.0; },
                        [](const nonlin::CompClip& c) { return c.m; },
                        [](const nonlin::CompQuant& q) { return q.bound; },
                        [](const nonlin::Normalize&) { return 1.0; },
                        [](const nonlin::JointClip& c) { return c.M; },
                    },
                    variant_);
}

double NonlinearMap::uniform_bound() const {
  const double c = scalar_bound();
  return is_component_wise() ? c * std::sqrt(static_cast<double>(dim_)) : c;
}

// ---------------------------------------------------------------------------
// Axiom checks

bool AxiomReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.passed; });
}

const AxiomCheck* AxiomReport::find(const std::string& axiom) const {
  for (const auto& c : checks)
    if (c.axiom == axiom) return &c;
  return nullptr;
}

namespace {

// Magnitudes spread over 10^-4 .. 10^4 with random sign.
double random_scalar(RngStream& rng) {
  const double mag = std::pow(10.0, -4.0 + 8.0 * rng.uniform());
  return rng.uniform() < 0.5 ? -mag : mag;
}

std::string describe(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) os << ", ";
    os << k << "=" << stats::format_double(v);
    first = false;
  }
  return os.str();
}

void fail(AxiomCheck& check, std::string witness) {
  if (check.passed) {
    check.passed = false;
    check.witness = std::move(witness);
  }
}

}  // namespace

AxiomReport check_component_axioms(const std::function<double(double)>& n1, double c1,
                                   std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InvalidArgument("check_axioms: samples must be >= 1");
  RngStream rng(seed, 0xA110);
  AxiomCheck odd{"odd", true, {}}, mono{"non_decreasing", true, {}}, bound{"bounded", true, {}}, origin{"origin", true, {}};
  for (std::size_t s = 0; s < samples; ++s) {
    const double x = random_scalar(rng);
    const double y = random_scalar(rng);
    const double fx = n1(x), fmx = n1(-x);
    if (std::abs(fx + fmx) > kAxiomTol)
      fail(odd, describe({{"x", x}, {"N1(x)", fx}, {"N1(-x)", fmx}}));
    const double u = std::min(x, y), v = std::max(x, y);
    const double fu = n1(u), fv = n1(v);
    if (fu > fv + kAxiomTol) fail(mono, describe({{"u", u}, {"v", v}, {"N1(u)", fu}, {"N1(v)", fv}}));
    if (std::abs(fx) > c1 + kAxiomTol) fail(bound, describe({{"x", x}, {"N1(x)", fx}, {"C1", c1}}));
  }
  if (std::abs(n1(0.0)) > kAxiomTol) fail(odd, describe({{"x", 0.0}, {"N1(0)", n1(0.0)}}));

  // Either a jump at zero, or strict increase on a small symmetric grid.
  constexpr double eps = 1e-10;
  const bool jump = std::abs(n1(eps) - n1(-eps)) > 1e-6;
  if (!jump) {
    constexpr int grid = 64;
    constexpr double c = 1e-3;
    double prev = n1(-c);
    for (int k = 1; k <= grid; ++k) {
      const double x = -c + 2.0 * c * k / (grid + 1);
      const double fx = n1(x);
      if (!(fx > prev)) {
        fail(origin, "tie near origin: " + describe({{"x", x}, {"N1(x)", fx}, {"N1(prev)", prev}}));
        break;
      }
      prev = fx;
    }
  }
  return {{odd, mono, bound, origin}};
}

AxiomReport check_joint_axioms(const std::function<double(double)>& n2, double c2, std::size_t dim,
                               std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InvalidArgument("check_axioms: samples must be >= 1");
  if (dim == 0) throw InvalidArgument("check_axioms: dimension must be positive");
  RngStream rng(seed, 0xA111);
  AxiomCheck nonincr{"n2_non_increasing", true, {}}, aincr{"a_n2_non_decreasing", true, {}}, pos{"n2_positive", true, {}},
      bound{"bounded", true, {}}, odd{"odd", true, {}};
  Vector x(static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < samples; ++s) {
    const double p = std::abs(random_scalar(rng));
    const double q = std::abs(random_scalar(rng));
    const double a = std::min(p, q), b = std::max(p, q);
    const double na = n2(a), nb = n2(b);
    if (na + kAxiomTol < nb) fail(nonincr, describe({{"a", a}, {"b", b}, {"N2(a)", na}, {"N2(b)", nb}}));
    if (a * na > b * nb + kAxiomTol)
      fail(aincr, describe({{"a", a}, {"b", b}, {"a*N2(a)", a * na}, {"b*N2(b)", b * nb}}));
    if (!(na > 0.0)) fail(pos, describe({{"a", a}, {"N2(a)", na}}));

    for (auto& xi : x) xi = rng.normal();
    x *= std::abs(random_scalar(rng)) / x.norm();
    const double n = x.norm();
    const double fn = n2(n);
    const double out_norm = n * fn;
    if (out_norm > c2 + kAxiomTol) fail(bound, describe({{"|x|", n}, {"|Psi(x)|", out_norm}, {"C2", c2}}));
    // Psi(-x) = -x N2(|x|) holds by the form; evaluate anyway so a caller's
    // N2 that reads a sign bit would be caught.
    const double fneg = n2(x.norm());
    if (std::abs(fn - fneg) > kAxiomTol) fail(odd, describe({{"|x|", n}}));
  }
  return {{nonincr, aincr, pos, bound, odd}};
}

AxiomReport check_axioms(const NonlinearMap& map, std::size_t samples, std::uint64_t seed) {
  AxiomReport report;
  if (map.is_component_wise()) {
    report = check_component_axioms([&map](double x) { return map.component(x); }, map.scalar_bound(),
                                    samples, seed);
  } else {
    report = check_joint_axioms([&map](double a) { return map.joint_factor(a); }, map.scalar_bound(),
                                map.dim(), samples, seed);
  }

  // Vector-level checks on the assembled map.
  RngStream rng(seed, 0xA112);
  AxiomCheck vbound{"vector_bound", true, {}}, vodd{"vector_odd", true, {}};
  const double c = map.uniform_bound();
  Vector x(static_cast<Eigen::Index>(map.dim())), out(x.size()), out_neg(x.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& xi : x) xi = random_scalar(rng);
    map.apply(x, out);
    map.apply(-x, out_neg);
    if (out.norm() > c + kAxiomTol) fail(vbound, describe({{"|Psi(x)|", out.norm()}, {"C", c}}));
    if ((out + out_neg).lpNorm<Eigen::Infinity>() > kAxiomTol)
      fail(vodd, describe({{"|Psi(x)+Psi(-x)|_inf", (out + out_neg).lpNorm<Eigen::Infinity>()}}));
  }
  report.checks.push_back(vbound);
  report.checks.push_back(vodd);
  return report;
}

}  // namespace nlsgd
