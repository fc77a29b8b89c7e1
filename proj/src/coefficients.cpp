#include "gcf/coefficients.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace gcf {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// Index k with nodes[k] <= x < nodes[k+1], clamped to [0, n-2].
std::size_t bracket(const std::vector<double>& nodes, double x) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  std::size_t k = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
  return std::min(k, nodes.size() - 2);
}

double clamp_to(const std::vector<double>& nodes, double x) {
  return std::clamp(x, nodes.front(), nodes.back());
}

void validate_kernel(const CoagulationKernel::Variant& v) {
  std::visit(Overloaded{
                 [](const ModifiedSmoluchowski& k) {
                   require(std::isfinite(k.c) && k.c > 0.0,
                           fmt::format("modified_smoluchowski: c must be > 0, got {}", k.c));
                 },
                 [](const ActivatedSludge& k) {
                   require(std::isfinite(k.q) && k.q >= 0.0 && k.q < 3.0,
                           fmt::format("activated_sludge: q must lie in [0, 3), got {}", k.q));
                   require(std::isfinite(k.u_c) && k.u_c > 0.0,
                           fmt::format("activated_sludge: u_c must be > 0, got {}", k.u_c));
                 },
                 [](const ProductKernel& k) {
                   require(std::isfinite(k.omega) && k.omega >= 0.0 && k.omega < 1.0,
                           fmt::format("product: omega must lie in [0, 1), got {}", k.omega));
                 },
                 [](const ConstantKernel& k) {
                   require(finite_nonneg(k.value),
                           fmt::format("constant: value must be >= 0, got {}", k.value));
                 },
                 [](const TableKernel& k) {
                   const std::size_t n = k.sizes.size();
                   require(n >= 2, "table kernel: need at least 2 sizes");
                   require(k.values.size() == n * n, "table kernel: values must be sizes^2 long");
                   for (std::size_t i = 0; i < n; ++i) {
                     require(std::isfinite(k.sizes[i]) && k.sizes[i] > 0.0,
                             "table kernel: sizes must be positive");
                     if (i > 0) {
                       require(k.sizes[i] > k.sizes[i - 1],
                               "table kernel: sizes must be strictly increasing");
                     }
                   }
                   for (double x : k.values) {
                     require(finite_nonneg(x), "table kernel: values must be finite and >= 0");
                   }
                 },
                 [](const auto&) {},
             },
             v);
}

double table_bilinear(const TableKernel& t, double u, double u1) {
  const std::size_t n = t.sizes.size();
  u = clamp_to(t.sizes, u);
  u1 = clamp_to(t.sizes, u1);
  const std::size_t i = bracket(t.sizes, u);
  const std::size_t j = bracket(t.sizes, u1);
  const double su = (u - t.sizes[i]) / (t.sizes[i + 1] - t.sizes[i]);
  const double sv = (u1 - t.sizes[j]) / (t.sizes[j + 1] - t.sizes[j]);
  auto at = [&](std::size_t a, std::size_t b) { return t.values[a * n + b]; };
  return (1 - su) * (1 - sv) * at(i, j) + su * (1 - sv) * at(i + 1, j) +
         (1 - su) * sv * at(i, j + 1) + su * sv * at(i + 1, j + 1);
}

}  // namespace

double power_law(double x, double p) {
  if (p == 0.0) return 1.0;
  return std::pow(x, p);
}

// ---------------------------------------------------------------------------

CoagulationKernel::CoagulationKernel(Variant variant, double cutoff)
    : variant_(std::move(variant)), cutoff_(cutoff) {
  validate_kernel(variant_);
  require(cutoff_ > 0.0, "kernel cutoff must be > 0");
}

double CoagulationKernel::operator()(double u, double u1) const {
  if (!(u > 0.0) || !(u1 > 0.0)) {
    throw DomainError(fmt::format("coagulation kernel needs u, u1 > 0 (got {}, {})", u, u1));
  }
  return evaluate(u, u1);
}

double CoagulationKernel::evaluate(double u, double u1) const {
  if (u > cutoff_ || u1 > cutoff_) return 0.0;
  return base(u, u1);
}

double CoagulationKernel::base(double u, double u1) const {
  const double a = std::cbrt(u);
  const double b = std::cbrt(u1);
  const double s = a + b;
  return std::visit(Overloaded{
                        [&](const LinearShear&) { return s * s * s; },
                        [&](const NonlinearShear&) { return std::pow(s, 7.0 / 3.0); },
                        [&](const Gravitational&) { return s * s * std::abs(a - b); },
                        [&](const ModifiedSmoluchowski& k) { return s * s / (a * b + k.c); },
                        [&](const ActivatedSludge& k) {
                          const double r = s / (2.0 * std::cbrt(k.u_c));
                          return power_law(s, k.q) / (1.0 + r * r * r);
                        },
                        [&](const ProductKernel& k) { return power_law(u * u1, k.omega); },
                        [&](const ConstantKernel& k) { return k.value; },
                        [&](const TableKernel& t) {
                          return 0.5 * (table_bilinear(t, u, u1) + table_bilinear(t, u1, u));
                        },
                    },
                    variant_);
}

std::string CoagulationKernel::kind() const {
  return std::visit(Overloaded{
                        [](const LinearShear&) { return std::string("linear_shear"); },
                        [](const NonlinearShear&) { return std::string("nonlinear_shear"); },
                        [](const Gravitational&) { return std::string("gravitational"); },
                        [](const ModifiedSmoluchowski&) {
                          return std::string("modified_smoluchowski");
                        },
                        [](const ActivatedSludge&) { return std::string("activated_sludge"); },
                        [](const ProductKernel&) { return std::string("product"); },
                        [](const ConstantKernel&) { return std::string("constant"); },
                        [](const TableKernel&) { return std::string("table"); },
                    },
                    variant_);
}

bool CoagulationKernel::is_zero() const {
  if (const auto* c = std::get_if<ConstantKernel>(&variant_)) return c->value == 0.0;
  return false;
}

CoagulationKernel CoagulationKernel::truncated(double level) const {
  require(level > 0.0, fmt::format("truncation level must be > 0, got {}", level));
  return CoagulationKernel(variant_, std::min(cutoff_, level));
}

// ---------------------------------------------------------------------------

FragmentationSpec::FragmentationSpec(double l0, double l1, double cutoff)
    : l0_(l0), l1_(l1), cutoff_(cutoff) {
  require(finite_nonneg(l0), fmt::format("fragmentation: l0 must be >= 0, got {}", l0));
  require(std::isfinite(l1) && l1 >= 0.0 && l1 <= 1.0,
          fmt::format("fragmentation: l1 must lie in [0, 1], got {}", l1));
  require(cutoff > 0.0, "fragmentation cutoff must be > 0");
}

double FragmentationSpec::operator()(double u) const {
  if (u < 0.0) throw DomainError(fmt::format("fragmentation rate needs u >= 0, got {}", u));
  if (u > cutoff_) return 0.0;
  return l0_ * power_law(u, l1_);
}

FragmentationSpec FragmentationSpec::truncated(double level) const {
  require(level > 0.0, fmt::format("truncation level must be > 0, got {}", level));
  return FragmentationSpec(l0_, l1_, std::min(cutoff_, level));
}

// ---------------------------------------------------------------------------

DaughterSpec::DaughterSpec(double nu) : nu_(nu) {
  require(std::isfinite(nu) && nu > -1.0 && nu <= 0.0,
          fmt::format("daughter: nu must lie in (-1, 0], got {}", nu));
}

double DaughterSpec::operator()(double u, double u1) const {
  if (!(u1 > 0.0)) throw DomainError(fmt::format("daughter density needs u1 > 0, got {}", u1));
  if (!(u > 0.0) || !(u < u1)) return 0.0;
  return (nu_ + 2.0) * std::pow(u, nu_) / std::pow(u1, nu_ + 1.0);
}

double DaughterSpec::daughter_count() const { return (nu_ + 2.0) / (nu_ + 1.0); }

double DaughterSpec::number_between(double lo, double hi, double u1) const {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, u1);
  if (!(hi > lo)) return 0.0;
  const double p = nu_ + 1.0;
  return daughter_count() * (std::pow(hi / u1, p) - std::pow(lo / u1, p));
}

double DaughterSpec::mass_between(double lo, double hi, double u1) const {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, u1);
  if (!(hi > lo)) return 0.0;
  const double p = nu_ + 2.0;
  return u1 * (std::pow(hi / u1, p) - std::pow(lo / u1, p));
}

// ---------------------------------------------------------------------------

RateFunction::RateFunction(Variant variant, double cutoff, double offset)
    : variant_(std::move(variant)), cutoff_(cutoff), offset_(offset) {
  std::visit(Overloaded{
                 [](const AffineRate& r) {
                   require(finite_nonneg(r.slope) && finite_nonneg(r.intercept),
                           fmt::format("affine: slope and intercept must be >= 0, got {}, {}",
                                       r.slope, r.intercept));
                 },
                 [](const PowerLawRate& r) {
                   require(finite_nonneg(r.coef),
                           fmt::format("power_law: coef must be >= 0, got {}", r.coef));
                   require(std::isfinite(r.exponent) && r.exponent >= 0.0 && r.exponent <= 1.0,
                           fmt::format("power_law: exponent must lie in [0, 1], got {}",
                                       r.exponent));
                 },
                 [](const ConstantRate& r) {
                   require(finite_nonneg(r.value),
                           fmt::format("constant: value must be >= 0, got {}", r.value));
                 },
                 [](const TableRate& t) {
                   require(t.u.size() >= 2 && t.u.size() == t.values.size(),
                           "table rate: need >= 2 nodes and matching values");
                   for (std::size_t k = 0; k < t.u.size(); ++k) {
                     require(finite_nonneg(t.u[k]), "table rate: nodes must be >= 0");
                     require(finite_nonneg(t.values[k]), "table rate: values must be >= 0");
                     if (k > 0) require(t.u[k] > t.u[k - 1], "table rate: nodes must increase");
                   }
                 },
             },
             variant_);
  require(cutoff_ > 0.0, "rate cutoff must be > 0");
  require(finite_nonneg(offset_), "rate offset must be >= 0");
}

double RateFunction::operator()(double u) const {
  if (u < 0.0) throw DomainError(fmt::format("rate needs u >= 0, got {}", u));
  return (u > cutoff_ ? 0.0 : base(u)) + offset_;
}

double RateFunction::base(double u) const {
  return std::visit(Overloaded{
                        [&](const AffineRate& r) { return r.slope * u + r.intercept; },
                        [&](const PowerLawRate& r) { return r.coef * power_law(u, r.exponent); },
                        [&](const ConstantRate& r) { return r.value; },
                        [&](const TableRate& t) {
                          const double x = clamp_to(t.u, u);
                          const std::size_t k = bracket(t.u, x);
                          const double s = (x - t.u[k]) / (t.u[k + 1] - t.u[k]);
                          return (1 - s) * t.values[k] + s * t.values[k + 1];
                        },
                    },
                    variant_);
}

std::string RateFunction::kind() const {
  return std::visit(Overloaded{
                        [](const AffineRate&) { return std::string("affine"); },
                        [](const PowerLawRate&) { return std::string("power_law"); },
                        [](const ConstantRate&) { return std::string("constant"); },
                        [](const TableRate&) { return std::string("table"); },
                    },
                    variant_);
}

bool RateFunction::is_zero() const {
  if (offset_ != 0.0) return false;
  return std::visit(Overloaded{
                        [](const AffineRate& r) { return r.slope == 0.0 && r.intercept == 0.0; },
                        [](const PowerLawRate& r) { return r.coef == 0.0; },
                        [](const ConstantRate& r) { return r.value == 0.0; },
                        [](const TableRate& t) {
                          return std::all_of(t.values.begin(), t.values.end(),
                                             [](double v) { return v == 0.0; });
                        },
                    },
                    variant_);
}

RateFunction RateFunction::with_cutoff(double level) const {
  require(level > 0.0, fmt::format("truncation level must be > 0, got {}", level));
  return RateFunction(variant_, std::min(cutoff_, level), offset_);
}

RateFunction RateFunction::with_offset(double offset) const {
  return RateFunction(variant_, cutoff_, offset);
}

}  // namespace gcf
