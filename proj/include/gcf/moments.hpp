#ifndef GCF_MOMENTS_HPP_
#define GCF_MOMENTS_HPP_

#include "gcf/operators.hpp"

namespace gcf {

struct MomentRecord {
  double t = 0.0;
  double M0 = 0.0;
  double M1 = 0.0;
  double M2 = 0.0;
  /// ∫ (1 + u) ξ du, computed as M0 + M1.
  double weighted_norm = 0.0;
  double overflow_mass = 0.0;
  double renewal_number = 0.0;
  double renewal_mass_artifact = 0.0;
};

/// Σ_i x_i^γ ξ_i Δ_i (pivot quadrature). Throws DomainError for γ < 0.
double moment(const StateVector& state, double gamma);

/// Σ_i (1 + x_i) ξ_i Δ_i.
double weighted_norm(const StateVector& state);

/// Moments of the state; ledger fields left at zero.
MomentRecord moment_record(const StateVector& state);

}  // namespace gcf

#endif  // GCF_MOMENTS_HPP_
