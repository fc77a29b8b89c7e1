#ifndef GCF_DIAGNOSTICS_HPP_
#define GCF_DIAGNOSTICS_HPP_

#include <string>
#include <variant>
#include <vector>

#include "gcf/assumptions.hpp"
#include "gcf/integrator.hpp"
#include "gcf/moments.hpp"

namespace gcf {

struct MassBalance {
  double residual = 0.0;
  /// |residual| / M1(t1), or |residual| when M1(t1) = 0.
  double relative = 0.0;
  double mass_change = 0.0;
  /// Trapezoid of Σ (g(x_i) - x_i μ(x_i)) ξ_i Δ_i over the output times.
  double source_integral = 0.0;
  double overflow = 0.0;
  double renewal_artifact = 0.0;
  double clamp = 0.0;
};

/// M1(t2) - M1(t1) - ∫ Σ (g - uμ) ξ + overflow - renewal mass - clamp mass.
/// t1, t2 must be snapshot times; throws std::out_of_range otherwise.
MassBalance mass_balance_residual(const Trajectory& traj, const CoefficientSet& set, double t1,
                                  double t2);

/// Same identity with the source integral taken from the step ledger instead
/// of the trapezoid rule; vanishes up to roundoff for the discrete system.
MassBalance ledger_mass_residual(const Trajectory& traj, std::size_t index);

struct ExpDecayTest {
  double k = 1.0;
};
struct CappedLinearTest {
  double cap = 1.0;
};
/// exp(1 - 1/(1 - s^2)) with s = (u - center)/half_width, peak value 1.
struct SmoothBumpTest {
  double center = 1.0;
  double half_width = 0.5;
};

class TestFunction {
 public:
  using Family = std::variant<ExpDecayTest, CappedLinearTest, SmoothBumpTest>;

  explicit TestFunction(Family family);

  double value(double u) const;
  double derivative(double u) const;
  /// ψ(ϑ)(u1) = ∫_0^{u1} ϑ(u) β(u|u1) du - ϑ(u1).
  double psi(double u1, const DaughterSpec& daughter) const;
  /// ϑ(u + u1) - ϑ(u) - ϑ(u1).
  double tilde(double u, double u1) const;
  /// "C1" or "Lipschitz".
  std::string regularity() const;
  const Family& family() const { return family_; }

 private:
  Family family_;
};

struct WeakFormResidual {
  double residual = 0.0;
  double left = 0.0;
  double right = 0.0;
  std::string regularity;
};

/// Both sides of the weak formulation at snapshot time t, with the time
/// integral taken by the trapezoid rule over the snapshots.
WeakFormResidual weak_form_residual(const Trajectory& traj, const CoefficientSet& set,
                                    const TestFunction& test, double t);

/// Σ_i (1 + x_i) |a_i - b_i| Δ_i. Throws DomainError on grid mismatch.
double weighted_difference_norm(const StateVector& a, const StateVector& b);

enum class MomentKind { M0, M1 };

struct DecayFit {
  double slope = 0.0;
  double prefactor = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log M = log C + slope · log t over records with t in [t_lo, t_hi].
/// Throws DomainError with fewer than 5 records in the window or a nonpositive value or time.
DecayFit decay_fit(const std::vector<MomentRecord>& moments, MomentKind which, double t_lo,
                   double t_hi);

/// C3 = ‖a‖ + ‖g‖ + M · max(Pα, Qα) + 1, with ‖f‖ = sup f/(1 + u) from the report.
double exponential_envelope_rate(const AssumptionReport& report);

/// Gronwall envelope for M2 on [0, T] with u² as the convex weight.
/// m2_initial = M2(0), norm_initial = ‖ξ^in‖.
double second_moment_envelope(const AssumptionReport& report, double m2_initial,
                              double norm_initial, double horizon);

}  // namespace gcf

#endif  // GCF_DIAGNOSTICS_HPP_
