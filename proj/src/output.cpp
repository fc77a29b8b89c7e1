#include "gcf/output.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace gcf {

std::string moments_csv(const Trajectory& traj, const std::string& digest) {
  std::string out = fmt::format("# config-digest: {}\n", digest);
  out += "t,M0,M1,M2,weighted_norm,overflow_mass,renewal_number,renewal_mass_artifact\n";
  for (const auto& m : traj.moments) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", m.t,
                       m.M0, m.M1, m.M2, m.weighted_norm, m.overflow_mass, m.renewal_number,
                       m.renewal_mass_artifact);
  }
  return out;
}

std::string snapshot_csv(const StateVector& state, const std::string& digest) {
  std::string out = fmt::format("# config-digest: {}\n# t = {:.17g}\nu_pivot,xi\n", digest, state.t);
  for (std::size_t i = 0; i < state.xi.size(); ++i) {
    out += fmt::format("{:.17g},{:.17g}\n", state.grid->pivot(i), state.xi[i]);
  }
  return out;
}

std::string moments_svg(const Trajectory& traj, const std::string& digest) {
  constexpr double width = 640.0, height = 400.0, margin = 50.0;
  const auto& m = traj.moments;
  struct Series {
    const char* name;
    const char* color;
    double MomentRecord::*field;
  };
  const Series series[] = {{"M0", "#1f77b4", &MomentRecord::M0},
                           {"M1", "#d62728", &MomentRecord::M1},
                           {"M2", "#2ca02c", &MomentRecord::M2}};
  double t_max = 0.0, y_lo = kInf, y_hi = -kInf;
  for (const auto& r : m) {
    t_max = std::max(t_max, r.t);
    for (const auto& s : series) {
      const double v = r.*(s.field);
      if (v > 0.0) {
        y_lo = std::min(y_lo, std::log10(v));
        y_hi = std::max(y_hi, std::log10(v));
      }
    }
  }
  if (!(t_max > 0.0)) t_max = 1.0;
  if (!(y_hi >= y_lo)) {
    y_lo = -1.0;
    y_hi = 1.0;
  }
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  auto px = [&](double t) { return margin + (width - 2 * margin) * t / t_max; };
  auto py = [&](double y) { return height - margin - (height - 2 * margin) * (y - y_lo) / (y_hi - y_lo); };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n"
      "<!-- config-digest: {} -->\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n"
      "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
      width, height, digest, fmt::arg("m", margin), fmt::arg("b", height - margin),
      fmt::arg("r", width - margin));
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">t (0 to {:.4g})</text>\n",
                     width / 2 - 30, height - 15, t_max);
  out += fmt::format(
      "<text x=\"10\" y=\"{}\" font-size=\"12\">log10 M ({:.3g} to {:.3g})</text>\n", margin - 20,
      y_lo, y_hi);
  int row = 0;
  for (const auto& s : series) {
    std::string points;
    for (const auto& r : m) {
      const double v = r.*(s.field);
      if (!(v > 0.0)) continue;
      points += fmt::format("{:.2f},{:.2f} ", px(r.t), py(std::log10(v)));
    }
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                       s.color, points);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">{}</text>\n",
                       width - margin + 5, margin + 15 * row++, s.color, s.name);
  }
  out += "</svg>\n";
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  out << contents;
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

void write_json(const std::string& path, const nlohmann::json& value) {
  write_file(path, value.dump(2) + "\n");
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create directory '{}': {}", path, ec.message()));
}

}  // namespace gcf
