#ifndef GCF_ASSUMPTIONS_HPP_
#define GCF_ASSUMPTIONS_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gcf/coefficients.hpp"

namespace gcf {

/// Log-spaced probe set over (u_lo, u_hi) used to certify the coefficient hypotheses.
struct ProbeSpec {
  double u_lo = 1e-4;
  double u_hi = 1e4;
  int per_decade = 8;
  /// Exponent for the kernel lower bound Υ >= Υ2 (u u1)^(λ/2). Scanned over (1, 2] when absent.
  std::optional<double> lambda;
  /// Thresholds θ at which δθ = inf{Υ(u,u1) : u, u1 > θ} is fitted.
  std::vector<double> thetas = {1e-2, 1e-1, 1.0, 10.0};

  std::vector<double> points() const;
};

struct WorstPoint {
  double u = 0.0;
  double u1 = 0.0;
  double value = 0.0;
};

struct HypothesisEntry {
  std::string id;
  bool satisfied = false;
  std::vector<std::pair<std::string, double>> constants;
  std::optional<WorstPoint> worst;
  std::string note;

  double constant(const std::string& name) const;
};

struct AssumptionReport {
  std::vector<HypothesisEntry> entries;

  const HypothesisEntry& at(const std::string& id) const;
  bool satisfied(const std::string& id) const { return at(id).satisfied; }
  double constant(const std::string& id, const std::string& name) const {
    return at(id).constant(name);
  }
};

/// Samples every hypothesis on the probe grid and reports fitted constants.
///
/// Bounds are judged "satisfied" when the last probe decade moves the sampled
/// supremum (or infimum) by at most 1%, i.e. the sampled ratio has stopped
/// growing (shrinking) along the tail. Violations are reported, never thrown.
/// Throws ParameterError if the probe specification is invalid.
AssumptionReport verify_assumptions(const CoefficientSet& set, const ProbeSpec& probes = {});

/// Pointwise margin g(u) - u μ(u); positive values violate death dominance.
double death_dominance_margin(const CoefficientSet& set, double u);

nlohmann::json to_json(const AssumptionReport& report);

}  // namespace gcf

#endif  // GCF_ASSUMPTIONS_HPP_
