#ifndef GCF_INTEGRATOR_HPP_
#define GCF_INTEGRATOR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcf/moments.hpp"
#include "gcf/operators.hpp"

namespace gcf {

// A step produced a component below the roundoff clamp threshold.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { Euler, SspRk2 };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct StepperConfig {
  double t_end = 0.0;
  /// Sorted times in [0, t_end]; 0 and t_end are always added.
  std::vector<double> output_times;
  double safety = 0.9;
  double dt_max = 1.0;
  Method method = Method::SspRk2;
  /// Guard for the transport CFL bound when g vanishes.
  double eps_g = 1e-300;

  /// Throws ParameterError on an invalid configuration.
  void validate() const;
  /// output_times with 0 and t_end merged in, sorted and deduplicated.
  std::vector<double> schedule() const;
};

/// Cumulative fluxes, integrated with the same weights as the state update.
struct Ledger {
  double overflow_mass = 0.0;
  double overflow_number = 0.0;
  double renewal_number = 0.0;
  double renewal_mass = 0.0;
  double death_number = 0.0;
  double death_mass = 0.0;
  /// ∫ Σ g(x_i) ξ_i Δ_i dt.
  double growth_mass = 0.0;
  /// Mass added by clamping roundoff negatives to zero.
  double clamp_mass = 0.0;
  std::size_t clamp_count = 0;
  std::size_t steps = 0;
  std::size_t retries = 0;
};

struct Trajectory {
  std::vector<StateVector> snapshots;
  std::vector<MomentRecord> moments;
  std::vector<Ledger> ledgers;
  Ledger ledger;

  std::size_t size() const { return snapshots.size(); }
  /// Index of the snapshot at time t (exact match). Throws std::out_of_range.
  std::size_t index_of(double t) const;
};

/// Largest admissible step: safety · min(min_i d_i / max(g_i, eps_g), 1/Λ_max), capped at dt_max.
double stable_dt(const ModelTables& tables, const RhsTerms& terms, const StepperConfig& cfg);

/// Advances one step of size dt and adds the integrated fluxes to `ledger`.
/// Returns nothing if dt violates the stage stability bound (dt·Λ > 1 at a stage).
/// Throws StabilityError if a component drops below -1e-14 · max ξ.
std::optional<StateVector> try_step(const StateVector& state, const ModelTables& tables, double dt,
                                    Method method, Ledger& ledger);

/// Like try_step, but throws StabilityError instead of returning nothing.
StateVector step(const StateVector& state, const ModelTables& tables, double dt, Method method,
                 Ledger& ledger);

Trajectory run(const StateVector& initial, const ModelTables& tables, const StepperConfig& cfg);
Trajectory run(const StateVector& initial, const CoefficientSet& set, const StepperConfig& cfg,
               unsigned threads = 1);

}  // namespace gcf

#endif  // GCF_INTEGRATOR_HPP_
