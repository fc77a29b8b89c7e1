#ifndef GCF_EXPERIMENTS_HPP_
#define GCF_EXPERIMENTS_HPP_

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gcf/assumptions.hpp"
#include "gcf/config.hpp"
#include "gcf/diagnostics.hpp"

namespace gcf {

enum class ExperimentStatus { Pass, Fail, Inconclusive, HypothesisViolation };

std::string to_string(ExperimentStatus status);

struct ExperimentReport {
  std::string id;
  std::string digest;
  ExperimentStatus status = ExperimentStatus::Fail;
  bool pass = false;
  /// "proven" or "outside proven regime".
  std::string regime = "proven";
  std::vector<std::pair<std::string, double>> measured;
  std::vector<std::pair<std::string, double>> tolerances;
  std::vector<std::string> violated;
  std::vector<std::string> notes;
  double runtime_seconds = 0.0;

  double value(const std::string& name) const;
  void set(const std::string& name, double v) { measured.emplace_back(name, v); }
};

nlohmann::json to_json(const ExperimentReport& report);

/// Runs the solver on the configured (possibly truncated) coefficients.
Trajectory simulate(const RunConfig& config);

/// Pure constant-kernel coagulation against M0(0) / (1 + K M0(0) t / 2).
ExperimentReport constant_kernel_benchmark(const RunConfig& config);

/// Solutions at consecutive truncation levels; differences must shrink and the last be small.
ExperimentReport truncation_convergence(const RunConfig& config, const std::vector<double>& levels,
                                        double tolerance = 1e-3);

/// Twin runs from ξ^in and (1 + ε) ξ^in; ρ(t) = ‖ξ1 - ξ2‖ / ‖ξ1^in - ξ2^in‖.
ExperimentReport stability_experiment(const RunConfig& config, const std::vector<double>& epsilons);

/// M0 and M1 nonincreasing, M0(t_end) <= 0.1 M0(0).
ExperimentReport longtime_zeroth(const RunConfig& config);

/// Fitted M1 slope over [t_lo, t_hi] in [-0.7, -0.4] and M1 √t within 3× its value at t_lo.
ExperimentReport longtime_first(const RunConfig& config, double t_lo = 10.0, double t_hi = 100.0);

/// Dispatch by name (see experiment_names()); uses the experiment block of the config.
ExperimentReport run_experiment(const std::string& name, const RunConfig& config);

/// Built-in configuration for each named experiment.
RunConfig default_config(const std::string& name);

}  // namespace gcf

#endif  // GCF_EXPERIMENTS_HPP_
