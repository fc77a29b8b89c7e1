#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <string>
#include <vector>

#include "gcf/assumptions.hpp"
#include "gcf/config.hpp"
#include "gcf/experiments.hpp"
#include "gcf/output.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kExperimentFail = 3 };

void log(const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); }

gcf::RunConfig config_or_default(const std::string& path, const std::string& experiment) {
  if (!path.empty()) return gcf::load_config(path);
  return gcf::default_config(experiment);
}

std::string out_dir(const gcf::RunConfig& cfg, const std::string& override_dir) {
  const std::string dir = override_dir.empty() ? cfg.output_dir : override_dir;
  gcf::ensure_directory(dir);
  return dir;
}

int report_and_exit(const std::vector<gcf::ExperimentReport>& reports, const std::string& dir) {
  nlohmann::json index = nlohmann::json::array();
  bool all = true;
  for (const auto& r : reports) {
    const std::string file = fmt::format("{}/{}.json", dir, r.id);
    gcf::write_json(file, gcf::to_json(r));
    index.push_back({{"id", r.id}, {"status", gcf::to_string(r.status)}, {"file", file}});
    std::string summary = fmt::format("{}: {} ({:.2f} s)", r.id, gcf::to_string(r.status),
                                      r.runtime_seconds);
    for (const auto& note : r.notes) summary += "\n  " + note;
    log(summary);
    all = all && r.pass;
  }
  gcf::write_json(dir + "/summary.json", {{"experiments", index}});
  return all ? kOk : kExperimentFail;
}

int cmd_run(const std::string& config_path, const std::string& dir_override, bool plot,
            bool final_only) {
  const gcf::RunConfig cfg = gcf::load_config(config_path);
  const std::string digest = gcf::config_digest(cfg);
  const gcf::Trajectory traj = gcf::simulate(cfg);
  const std::string dir = out_dir(cfg, dir_override);
  gcf::write_file(dir + "/moments.csv", gcf::moments_csv(traj, digest));
  for (std::size_t k = final_only ? traj.size() - 1 : 0; k < traj.size(); ++k) {
    gcf::write_file(fmt::format("{}/snapshot_{:05d}.csv", dir, k),
                    gcf::snapshot_csv(traj.snapshots[k], digest));
  }
  if (plot) gcf::write_file(dir + "/moments.svg", gcf::moments_svg(traj, digest));
  log(fmt::format("run {}: {} snapshots, {} steps, {} clamps, written to {}", digest, traj.size(),
                  traj.ledger.steps, traj.ledger.clamp_count, dir));
  return kOk;
}

int cmd_check(const std::string& config_path, const std::string& output) {
  const gcf::RunConfig cfg = gcf::load_config(config_path);
  const gcf::AssumptionReport report = gcf::verify_assumptions(cfg.coefficients);
  nlohmann::json j = gcf::to_json(report);
  j["config_digest"] = gcf::config_digest(cfg);
  std::string path = output;
  if (path.empty()) path = out_dir(cfg, "") + "/assumptions.json";
  gcf::write_json(path, j);
  for (const auto& e : report.entries) {
    log(fmt::format("{:>8}  {}", e.id, e.satisfied ? "satisfied" : "VIOLATED"));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Growth-coagulation-fragmentation solver and validation harness"};
  app.require_subcommand(1);

  std::string config_path, dir_override, output, select, levels_arg;
  bool plot = false, final_only = false;

  auto* run = app.add_subcommand("run", "Integrate a configuration and write CSV output");
  run->add_option("--config,-c", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
  run->add_option("--out,-o", dir_override, "Output directory (overrides output_dir)");
  run->add_flag("--plot", plot, "Also write moments.svg");
  run->add_flag("--final-only", final_only, "Write only the final snapshot");

  auto* check = app.add_subcommand("check-kernels", "Certify coefficient hypotheses");
  check->add_option("--config,-c", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
  check->add_option("--output", output, "Report path (default <output_dir>/assumptions.json)");

  auto* bench = app.add_subcommand("benchmark", "Constant-kernel analytic benchmark");
  bench->add_option("--config,-c", config_path, "JSON configuration (default built-in)")->check(CLI::ExistingFile);
  bench->add_option("--out,-o", dir_override, "Output directory");

  auto* exps = app.add_subcommand("experiments", "Run validation experiments");
  exps->add_option("--select,-s", select, "Comma-separated experiment names, or 'all'")->required();
  exps->add_option("--config,-c", config_path, "JSON configuration (default built-in per experiment)")
      ->check(CLI::ExistingFile);
  exps->add_option("--out,-o", dir_override, "Output directory");

  auto* conv = app.add_subcommand("convergence", "Truncation-level convergence study");
  conv->add_option("--config,-c", config_path, "JSON configuration (default built-in)")->check(CLI::ExistingFile);
  conv->add_option("--levels", levels_arg, "Comma-separated truncation levels");
  conv->add_option("--out,-o", dir_override, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(config_path, dir_override, plot, final_only);
    if (*check) return cmd_check(config_path, output);
    if (*bench) {
      const auto cfg = config_or_default(config_path, "constant_kernel_benchmark");
      return report_and_exit({gcf::constant_kernel_benchmark(cfg)}, out_dir(cfg, dir_override));
    }
    if (*conv) {
      const auto cfg = config_or_default(config_path, "truncation_convergence");
      auto e = cfg.experiment.value_or(gcf::ExperimentConfig{});
      if (!levels_arg.empty()) {
        e.levels.clear();
        for (const auto& tok : CLI::detail::split(levels_arg, ',')) e.levels.push_back(std::stod(tok));
      }
      return report_and_exit({gcf::truncation_convergence(cfg, e.levels, e.tolerance)},
                             out_dir(cfg, dir_override));
    }
    if (*exps) {
      std::vector<std::string> names;
      if (select == "all") {
        names = gcf::experiment_names();
      } else {
        for (auto tok : CLI::detail::split(select, ',')) {
          const auto& known = gcf::experiment_names();
          if (std::find(known.begin(), known.end(), tok) == known.end()) {
            log(fmt::format("error: unknown experiment '{}'", tok));
            return kValidation;
          }
          names.push_back(tok);
        }
      }
      std::vector<gcf::ExperimentReport> reports;
      std::string dir;
      for (const auto& name : names) {
        const auto cfg = config_or_default(config_path, name);
        if (dir.empty()) dir = out_dir(cfg, dir_override);
        reports.push_back(gcf::run_experiment(name, cfg));
      }
      return report_and_exit(reports, dir);
    }
  } catch (const gcf::ConfigError& e) {
    log(fmt::format("error: {}", e.what()));
    return kValidation;
  } catch (const gcf::ParameterError& e) {
    log(fmt::format("error: {}", e.what()));
    return kValidation;
  } catch (const std::invalid_argument& e) {
    log(fmt::format("error: {}", e.what()));
    return kValidation;
  } catch (const gcf::StabilityError& e) {
    log(fmt::format("stability failure: {}", e.what()));
    return kRuntime;
  } catch (const std::exception& e) {
    log(fmt::format("runtime failure: {}", e.what()));
    return kRuntime;
  }
  return kOk;
}
