#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gcf/output.hpp"

using namespace gcf;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<double> fields_of(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(std::stod(f));
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Trajectory small_run() {
  auto g = std::make_shared<const SizeGrid>(GridSpec{10.0, 30, GridScheme::Geometric, 1.1});
  std::vector<double> xi(g->size());
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = std::exp(-g->pivot(i));
  CoefficientSet s;
  s.coag = CoagulationKernel(ConstantKernel{1.0});
  s.death = RateFunction(ConstantRate{0.3});
  s.birth = RateFunction(ConstantRate{0.1});
  StepperConfig c;
  c.t_end = 1.0;
  c.output_times = {0.25, 0.5, 0.75};
  return run(StateVector(g, 0.0, xi), s, c);
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("gcf_test_output_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("moments CSV: digest line, header, and exact round trip") {
  const Trajectory traj = small_run();
  const auto lines = lines_of(moments_csv(traj, "0123456789abcdef"));
  REQUIRE(lines.size() == traj.size() + 2);
  CHECK(lines[0] == "# config-digest: 0123456789abcdef");
  CHECK(lines[1] == "t,M0,M1,M2,weighted_norm,overflow_mass,renewal_number,renewal_mass_artifact");
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto f = fields_of(lines[k + 2]);
    REQUIRE(f.size() == 8);
    const MomentRecord& m = traj.moments[k];
    CHECK(f[0] == m.t);
    CHECK(f[1] == m.M0);
    CHECK(f[2] == m.M1);
    CHECK(f[3] == m.M2);
    CHECK(f[4] == m.weighted_norm);
    CHECK(f[5] == m.overflow_mass);
    CHECK(f[6] == m.renewal_number);
    CHECK(f[7] == m.renewal_mass_artifact);
  }
}

TEST_CASE("snapshot CSV lists every pivot") {
  const Trajectory traj = small_run();
  const StateVector& st = traj.snapshots.back();
  const auto lines = lines_of(snapshot_csv(st, "abc"));
  REQUIRE(lines.size() == st.xi.size() + 3);
  CHECK(lines[0] == "# config-digest: abc");
  CHECK(lines[1] == "# t = 1");
  CHECK(lines[2] == "u_pivot,xi");
  for (std::size_t i = 0; i < st.xi.size(); ++i) {
    const auto f = fields_of(lines[i + 3]);
    REQUIRE(f.size() == 2);
    CHECK(f[0] == st.grid->pivot(i));
    CHECK(f[1] == st.xi[i]);
  }
}

TEST_CASE("SVG plot is a well-formed document") {
  const std::string svg = moments_svg(small_run(), "feed");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("config-digest: feed") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);

  // A single snapshot of zero data still plots.
  Trajectory zero;
  zero.moments.push_back(MomentRecord{});
  CHECK(moments_svg(zero, "0").find("</svg>") != std::string::npos);
}

TEST_CASE("files are rewritten, not appended") {
  const auto dir = scratch("files");
  ensure_directory((dir / "a" / "b").string());
  CHECK(std::filesystem::is_directory(dir / "a" / "b"));
  ensure_directory((dir / "a" / "b").string());

  const auto file = dir / "a" / "b" / "x.csv";
  write_file(file.string(), "first\nsecond\n");
  write_file(file.string(), "third\n");
  CHECK(slurp(file) == "third\n");

  write_json((dir / "r.json").string(), nlohmann::json{{"k", 1.5}});
  CHECK(nlohmann::json::parse(slurp(dir / "r.json"))["k"] == 1.5);

  CHECK_THROWS_AS(write_file((dir / "missing" / "x.csv").string(), "x"), std::runtime_error);
  write_file((dir / "plain").string(), "x");
  CHECK_THROWS_AS(ensure_directory((dir / "plain" / "sub").string()), std::runtime_error);
  std::filesystem::remove_all(dir);
}
