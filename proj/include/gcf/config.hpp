#ifndef GCF_CONFIG_HPP_
#define GCF_CONFIG_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gcf/coefficients.hpp"
#include "gcf/grid.hpp"
#include "gcf/integrator.hpp"
#include "gcf/operators.hpp"

namespace gcf {

// Malformed or out-of-range configuration. what() lists every violation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// ξ^in(u) = amplitude · exp(-u / scale), stored as exact cell averages.
struct ExpDecayInitial {
  double amplitude = 1.0;
  double scale = 1.0;
};
/// All particles in one cell (0-based index) with the given density.
struct MonodisperseInitial {
  std::size_t cell = 0;
  double density = 1.0;
};
/// Piecewise-linear through (u[k], xi[k]) sampled at pivots; zero outside [u.front(), u.back()].
struct TableInitial {
  std::vector<double> u;
  std::vector<double> xi;
};
using InitialSpec = std::variant<ExpDecayInitial, MonodisperseInitial, TableInitial>;

struct TruncationConfig {
  std::optional<double> level;
  /// Adds 1/level to the growth rate.
  bool growth_floor = true;
};

struct ExperimentConfig {
  std::string select;
  std::vector<double> epsilons = {1e-2, 1e-3, 1e-4};
  std::vector<double> levels = {5.0, 10.0, 20.0, 40.0};
  /// Decay-fit window for the first-moment experiment.
  double fit_lo = 10.0;
  double fit_hi = 100.0;
  /// Final-difference tolerance for the truncation study, relative to ‖ξ(t_end)‖.
  double tolerance = 1e-3;
};

struct RunConfig {
  CoefficientSet coefficients;
  GridSpec grid;
  InitialSpec initial = ExpDecayInitial{};
  StepperConfig stepper;
  unsigned threads = 1;
  TruncationConfig truncation;
  std::optional<ExperimentConfig> experiment;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
};

/// Names accepted by the experiment selector.
const std::vector<std::string>& experiment_names();

/// Throws ConfigError with line/column on malformed JSON, or with every
/// out-of-range field and unknown key on invalid content.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical form; parse_config(to_json(c).dump()) reproduces c.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const CoefficientSet& set);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_digest(const RunConfig& config);

/// Coefficients with the truncation applied when a level is configured.
CoefficientSet effective_coefficients(const RunConfig& config);

std::shared_ptr<const SizeGrid> make_grid(const RunConfig& config);
StateVector initial_state(const InitialSpec& spec, std::shared_ptr<const SizeGrid> grid);

}  // namespace gcf

#endif  // GCF_CONFIG_HPP_
