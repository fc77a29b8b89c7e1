#ifndef GCF_OUTPUT_HPP_
#define GCF_OUTPUT_HPP_

#include <string>

#include <json.hpp>

#include "gcf/integrator.hpp"

namespace gcf {

/// t, M0, M1, M2, weighted_norm, overflow_mass, renewal_number, renewal_mass_artifact,
/// preceded by a "# config-digest: ..." comment line.
std::string moments_csv(const Trajectory& traj, const std::string& digest);
/// u_pivot, xi.
std::string snapshot_csv(const StateVector& state, const std::string& digest);
/// Line chart of log10 M0, M1, M2 against t.
std::string moments_svg(const Trajectory& traj, const std::string& digest);

/// Writes (truncating) the whole file; throws std::runtime_error on I/O failure.
void write_file(const std::string& path, const std::string& contents);
void write_json(const std::string& path, const nlohmann::json& value);

/// Creates the directory (and parents) if missing.
void ensure_directory(const std::string& path);

}  // namespace gcf

#endif  // GCF_OUTPUT_HPP_
