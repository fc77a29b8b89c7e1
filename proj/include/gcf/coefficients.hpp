#ifndef GCF_COEFFICIENTS_HPP_
#define GCF_COEFFICIENTS_HPP_

#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gcf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Raised when a coefficient is evaluated outside its domain (e.g. u <= 0 for a kernel).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when a spec is constructed with out-of-range parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// x^p with the convention 0^0 = 1.
double power_law(double x, double p);

// ---------------------------------------------------------------------------
// Coagulation kernels
// ---------------------------------------------------------------------------

struct LinearShear {};
struct NonlinearShear {};
struct Gravitational {};
struct ModifiedSmoluchowski {
  double c = 1.0;
};
struct ActivatedSludge {
  double q = 0.0;
  double u_c = 1.0;
};
struct ProductKernel {
  double omega = 0.0;
};
struct ConstantKernel {
  double value = 1.0;
};
/// Sampled kernel on a square grid of sizes; `values` is row-major
/// (values[i * n + j] = K(sizes[i], sizes[j])). Evaluated by bilinear
/// interpolation, clamped outside the sampled range and symmetrized by
/// averaging K(u,u1) and K(u1,u).
struct TableKernel {
  std::vector<double> sizes;
  std::vector<double> values;
};

/// Coagulation rate Υ(u, u1). Symmetric and nonnegative by construction.
///
/// A finite `cutoff` realizes the truncated kernel Υ(u,u1)·χ[0,n](u)·χ[0,n](u1).
class CoagulationKernel {
 public:
  using Variant = std::variant<LinearShear, NonlinearShear, Gravitational, ModifiedSmoluchowski,
                               ActivatedSludge, ProductKernel, ConstantKernel, TableKernel>;

  CoagulationKernel() : CoagulationKernel(ConstantKernel{0.0}) {}
  explicit CoagulationKernel(Variant variant, double cutoff = kInf);

  /// Throws DomainError unless u > 0 and u1 > 0.
  double operator()(double u, double u1) const;
  /// Same as operator() without the domain check; callers guarantee u, u1 > 0.
  double evaluate(double u, double u1) const;

  const Variant& variant() const { return variant_; }
  double cutoff() const { return cutoff_; }
  std::string kind() const;
  bool is_zero() const;

  CoagulationKernel truncated(double level) const;

 private:
  double base(double u, double u1) const;

  Variant variant_;
  double cutoff_ = kInf;
};

// ---------------------------------------------------------------------------
// Fragmentation
// ---------------------------------------------------------------------------

/// α(u) = l0 · u^l1 with l0 >= 0, l1 in [0, 1].
class FragmentationSpec {
 public:
  FragmentationSpec() = default;
  FragmentationSpec(double l0, double l1, double cutoff = kInf);

  double operator()(double u) const;

  double l0() const { return l0_; }
  double l1() const { return l1_; }
  double cutoff() const { return cutoff_; }
  bool is_zero() const { return l0_ == 0.0; }

  FragmentationSpec truncated(double level) const;

 private:
  double l0_ = 0.0;
  double l1_ = 0.0;
  double cutoff_ = kInf;
};

/// Power-law daughter distribution β(u|u1) = (ν+2) u^ν / u1^(ν+1) on 0 < u < u1.
class DaughterSpec {
 public:
  DaughterSpec() = default;
  explicit DaughterSpec(double nu);

  double nu() const { return nu_; }

  /// Throws DomainError if u1 <= 0.
  double operator()(double u, double u1) const;

  /// Number of daughters per breakup, (ν+2)/(ν+1). Independent of the parent size.
  double daughter_count() const;

  /// ∫ β(u|u1) du over [lo, hi] ∩ (0, u1), closed form.
  double number_between(double lo, double hi, double u1) const;
  /// ∫ u β(u|u1) du over [lo, hi] ∩ (0, u1), closed form.
  double mass_between(double lo, double hi, double u1) const;

 private:
  double nu_ = 0.0;
};

// ---------------------------------------------------------------------------
// Growth, death and birth rates
// ---------------------------------------------------------------------------

struct AffineRate {
  double slope = 0.0;
  double intercept = 0.0;
};
struct PowerLawRate {
  double coef = 0.0;
  double exponent = 0.0;
};
struct ConstantRate {
  double value = 0.0;
};
/// Piecewise-linear through (u[k], values[k]); constant beyond the end nodes.
struct TableRate {
  std::vector<double> u;
  std::vector<double> values;
};

/// A nonnegative size-dependent rate, used for g, μ and a.
///
/// `cutoff` multiplies the rate by χ[0,cutoff]; `offset` is added afterwards
/// (the 1/n floor of the truncated growth rate).
class RateFunction {
 public:
  using Variant = std::variant<AffineRate, PowerLawRate, ConstantRate, TableRate>;

  RateFunction() : RateFunction(ConstantRate{0.0}) {}
  explicit RateFunction(Variant variant, double cutoff = kInf, double offset = 0.0);

  /// Throws DomainError for u < 0.
  double operator()(double u) const;

  const Variant& variant() const { return variant_; }
  double cutoff() const { return cutoff_; }
  double offset() const { return offset_; }
  std::string kind() const;
  bool is_zero() const;

  RateFunction with_cutoff(double level) const;
  RateFunction with_offset(double offset) const;

 private:
  double base(double u) const;

  Variant variant_;
  double cutoff_ = kInf;
  double offset_ = 0.0;
};

using GrowthSpec = RateFunction;
using DeathSpec = RateFunction;
using BirthSpec = RateFunction;

struct CoefficientSet {
  CoagulationKernel coag;
  FragmentationSpec frag;
  DaughterSpec daughter;
  GrowthSpec growth;
  DeathSpec death;
  BirthSpec birth;
};

}  // namespace gcf

#endif  // GCF_COEFFICIENTS_HPP_
