#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace nlsgd {

using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<Vector>;
using ConstVectorRef = Eigen::Ref<const Vector>;

namespace nonlin {

struct Sign {};

struct CompClip {
  double m = 1.0;
};

/// Piecewise-constant component quantizer. Coordinate value is values[j] for
/// x in (breakpoints[j-1], breakpoints[j]] with breakpoints[-1] = -inf and
/// breakpoints[J-1] = +inf, i.e. values.size() = breakpoints.size() + 1.
struct CompQuant {
  std::vector<double> breakpoints;
  std::vector<double> values;
  double bound = 1.0;  // R, strictly greater than every |value|
};

struct Normalize {};

struct JointClip {
  double M = 1.0;
};

using Variant = std::variant<Sign, CompClip, CompQuant, Normalize, JointClip>;

}  // namespace nonlin

/// A bounded map Psi: R^d -> R^d applied to the stochastic gradient.
///
/// Component-wise variants (Sign, CompClip, CompQuant) act coordinate-wise
/// through an odd non-decreasing scalar map; joint variants (Normalize,
/// JointClip) have the form x * N2(|x|).
class NonlinearMap {
 public:
  NonlinearMap(nonlin::Variant variant, std::size_t dim);

  static NonlinearMap sign(std::size_t dim);
  static NonlinearMap comp_clip(std::size_t dim, double m);
  static NonlinearMap normalize(std::size_t dim);
  static NonlinearMap joint_clip(std::size_t dim, double M);
  /// Mid-rise uniform quantizer with `levels` (even, >= 2) output levels on
  /// [-range, range]; outputs saturate at +-(levels-1)*range/levels and the
  /// bound R is `range`.
  static NonlinearMap uniform_quantizer(std::size_t dim, std::size_t levels, double range);

  std::size_t dim() const noexcept { return dim_; }
  const nonlin::Variant& variant() const noexcept { return variant_; }
  bool is_component_wise() const noexcept;
  std::string name() const;

  /// Psi(x) written into `out` (may not alias `x`).
  void apply(ConstVectorRef x, VectorRef out) const;
  Vector apply(ConstVectorRef x) const;

  /// Scalar N1 of a component-wise variant.
  double component(double x) const;
  /// Scalar N2 of a joint variant (N2(0) := 1 for clipping, 0 for Normalize).
  double joint_factor(double norm) const;

  /// Uniform bound C on |Psi(x)|.
  double uniform_bound() const;
  /// Per-coordinate bound C1 (component) or C2 (joint).
  double scalar_bound() const;

 private:
  nonlin::Variant variant_;
  std::size_t dim_;
};

struct AxiomCheck {
  std::string axiom;
  bool passed = true;
  std::string witness;  // empty on pass
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;
  bool all_passed() const;
  const AxiomCheck* find(const std::string& axiom) const;
};

/// Property-test driver for the nonlinearity axioms on random points.
AxiomReport check_axioms(const NonlinearMap& map, std::size_t samples, std::uint64_t seed);

/// Same checks for an arbitrary scalar component map with claimed bound C1.
AxiomReport check_component_axioms(const std::function<double(double)>& n1, double c1,
                                   std::size_t samples, std::uint64_t seed);

/// Joint-form checks for x * N2(|x|) in dimension `dim` with claimed bound C2.
AxiomReport check_joint_axioms(const std::function<double(double)>& n2, double c2,
                               std::size_t dim, std::size_t samples, std::uint64_t seed);

}  // namespace nlsgd
