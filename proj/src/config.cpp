#include "gcf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace gcf {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "invalid configuration:";
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

struct Range {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = true;
  bool hi_open = true;

  bool contains(double v) const {
    if (!std::isfinite(v)) return false;
    if (lo_open ? !(v > lo) : !(v >= lo)) return false;
    if (hi_open ? !(v < hi) : !(v <= hi)) return false;
    return true;
  }
  std::string text() const {
    auto bound = [](double x) { return std::isinf(x) ? std::string(x > 0 ? "inf" : "-inf") : fmt::format("{}", x); };
    return fmt::format("{}{}, {}{}", lo_open ? '(' : '[', bound(lo), bound(hi), hi_open ? ')' : ']');
  }
};

const Range kNonneg{0.0, kInf, false, true};
const Range kPositive{0.0, kInf, true, true};
const Range kUnit{0.0, 1.0, false, false};

class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) {
    errors.push_back(fmt::format("{}: {}", path.empty() ? "/" : path, msg));
  }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, fmt::format("expected an object, got {}", j.type_name()));
    return false;
  }

  void allow(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : obj.items()) {
      if (std::find_if(keys.begin(), keys.end(), [&](const char* a) { return k == a; }) ==
          keys.end()) {
        std::string allowed;
        for (const char* a : keys) allowed += (allowed.empty() ? "" : ", ") + std::string(a);
        fail(path + "/" + k, fmt::format("unknown key (allowed: {})", allowed.empty() ? "none" : allowed));
      }
    }
  }

  std::optional<double> number(const json& obj, const std::string& path, const char* key,
                               const Range& range, bool required) {
    const std::string p = path + "/" + key;
    if (!obj.contains(key)) {
      if (required) fail(p, fmt::format("required number in {} is missing", range.text()));
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
      fail(p, fmt::format("expected a number in {}, got {}", range.text(), v.type_name()));
      return std::nullopt;
    }
    const double x = v.get<double>();
    if (!range.contains(x)) {
      fail(p, fmt::format("value {} outside allowed range {}", x, range.text()));
      return std::nullopt;
    }
    return x;
  }

  double number_or(const json& obj, const std::string& path, const char* key, const Range& range,
                   double fallback) {
    return number(obj, path, key, range, false).value_or(fallback);
  }

  std::optional<long long> integer(const json& obj, const std::string& path, const char* key,
                                   long long lo, long long hi, bool required) {
    const std::string p = path + "/" + key;
    if (!obj.contains(key)) {
      if (required) fail(p, fmt::format("required integer in [{}, {}] is missing", lo, hi));
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      fail(p, fmt::format("expected an integer in [{}, {}], got {}", lo, hi, v.dump()));
      return std::nullopt;
    }
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      fail(p, fmt::format("value {} outside allowed range [{}, {}]", x, lo, hi));
      return std::nullopt;
    }
    return x;
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& path,
                                             const char* key, const Range& range, bool required,
                                             std::size_t min_size = 1) {
    const std::string p = path + "/" + key;
    if (!obj.contains(key)) {
      if (required) fail(p, "required array of numbers is missing");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_array()) {
      fail(p, fmt::format("expected an array of numbers, got {}", v.type_name()));
      return std::nullopt;
    }
    std::vector<double> out;
    bool ok = true;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) {
        fail(fmt::format("{}/{}", p, k), "expected a number");
        ok = false;
        continue;
      }
      const double x = v[k].get<double>();
      if (!range.contains(x)) {
        fail(fmt::format("{}/{}", p, k), fmt::format("value {} outside allowed range {}", x, range.text()));
        ok = false;
      }
      out.push_back(x);
    }
    if (ok && out.size() < min_size) {
      fail(p, fmt::format("needs at least {} entries, got {}", min_size, out.size()));
      ok = false;
    }
    return ok ? std::optional(out) : std::nullopt;
  }

  std::optional<std::string> string(const json& obj, const std::string& path, const char* key,
                                    bool required) {
    const std::string p = path + "/" + key;
    if (!obj.contains(key)) {
      if (required) fail(p, "required string is missing");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
      fail(p, fmt::format("expected a string, got {}", v.type_name()));
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<bool> boolean(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      fail(path + "/" + key, fmt::format("expected true or false, got {}", v.type_name()));
      return std::nullopt;
    }
    return v.get<bool>();
  }

  bool increasing(const std::vector<double>& v, const std::string& path) {
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (!(v[k] > v[k - 1])) {
        fail(path, "values must be strictly increasing");
        return false;
      }
    }
    return true;
  }
};

// Splits a {"kind", "params"} descriptor. Returns the kind, or nothing on error.
std::optional<std::string> descriptor(Reader& r, const json& d, const std::string& path,
                                      const json*& params) {
  static const json empty = json::object();
  params = &empty;
  if (!r.object(d, path)) return std::nullopt;
  r.allow(d, path, {"kind", "params"});
  auto kind = r.string(d, path, "kind", true);
  if (d.contains("params")) {
    if (!r.object(d.at("params"), path + "/params")) return std::nullopt;
    params = &d.at("params");
  }
  return kind;
}

void unknown_kind(Reader& r, const std::string& path, const std::string& kind,
                  const char* allowed) {
  r.fail(path + "/kind", fmt::format("unknown kind '{}' (allowed: {})", kind, allowed));
}

template <class F>
auto construct(Reader& r, const std::string& path, std::size_t errors_before, F&& make)
    -> std::optional<decltype(make())> {
  if (r.errors.size() != errors_before) return std::nullopt;
  try {
    return make();
  } catch (const ParameterError& e) {
    r.fail(path, e.what());
    return std::nullopt;
  }
}

CoagulationKernel read_kernel(Reader& r, const json& root) {
  if (!root.contains("coagulation")) return CoagulationKernel(ConstantKernel{0.0});
  const std::string path = "/coagulation";
  const json* params = nullptr;
  const std::size_t before = r.errors.size();
  const auto kind = descriptor(r, root.at("coagulation"), path, params);
  if (!kind) return CoagulationKernel();
  const json& p = *params;
  const std::string pp = path + "/params";
  CoagulationKernel::Variant v = ConstantKernel{0.0};
  if (*kind == "linear_shear") {
    r.allow(p, pp, {});
    v = LinearShear{};
  } else if (*kind == "nonlinear_shear") {
    r.allow(p, pp, {});
    v = NonlinearShear{};
  } else if (*kind == "gravitational") {
    r.allow(p, pp, {});
    v = Gravitational{};
  } else if (*kind == "modified_smoluchowski") {
    r.allow(p, pp, {"c"});
    v = ModifiedSmoluchowski{r.number(p, pp, "c", kPositive, true).value_or(1.0)};
  } else if (*kind == "activated_sludge") {
    r.allow(p, pp, {"q", "u_c"});
    v = ActivatedSludge{r.number(p, pp, "q", Range{0.0, 3.0, false, true}, true).value_or(0.0),
                        r.number(p, pp, "u_c", kPositive, true).value_or(1.0)};
  } else if (*kind == "product") {
    r.allow(p, pp, {"omega"});
    v = ProductKernel{r.number(p, pp, "omega", Range{0.0, 1.0, false, true}, true).value_or(0.0)};
  } else if (*kind == "constant") {
    r.allow(p, pp, {"value"});
    v = ConstantKernel{r.number(p, pp, "value", kNonneg, true).value_or(0.0)};
  } else if (*kind == "table") {
    r.allow(p, pp, {"sizes", "values"});
    TableKernel t;
    t.sizes = r.numbers(p, pp, "sizes", kPositive, true, 2).value_or(std::vector<double>{});
    t.values = r.numbers(p, pp, "values", kNonneg, true).value_or(std::vector<double>{});
    v = std::move(t);
  } else {
    unknown_kind(r, path, *kind,
                 "linear_shear, nonlinear_shear, gravitational, modified_smoluchowski, "
                 "activated_sludge, product, constant, table");
  }
  return construct(r, pp, before, [&] { return CoagulationKernel(v); }).value_or(CoagulationKernel());
}

FragmentationSpec read_fragmentation(Reader& r, const json& root) {
  if (!root.contains("fragmentation")) return FragmentationSpec();
  const std::string path = "/fragmentation";
  const json* params = nullptr;
  const std::size_t before = r.errors.size();
  const auto kind = descriptor(r, root.at("fragmentation"), path, params);
  if (!kind) return FragmentationSpec();
  const std::string pp = path + "/params";
  if (*kind == "none") {
    r.allow(*params, pp, {});
    return FragmentationSpec();
  }
  if (*kind != "power_law") {
    unknown_kind(r, path, *kind, "power_law, none");
    return FragmentationSpec();
  }
  r.allow(*params, pp, {"l0", "l1"});
  const double l0 = r.number(*params, pp, "l0", kNonneg, true).value_or(0.0);
  const double l1 = r.number_or(*params, pp, "l1", kUnit, 0.0);
  return construct(r, pp, before, [&] { return FragmentationSpec(l0, l1); })
      .value_or(FragmentationSpec());
}

DaughterSpec read_daughter(Reader& r, const json& root) {
  if (!root.contains("daughter")) return DaughterSpec();
  const std::string path = "/daughter";
  const json* params = nullptr;
  const std::size_t before = r.errors.size();
  const auto kind = descriptor(r, root.at("daughter"), path, params);
  if (!kind) return DaughterSpec();
  const std::string pp = path + "/params";
  if (*kind != "power_law") {
    unknown_kind(r, path, *kind, "power_law");
    return DaughterSpec();
  }
  r.allow(*params, pp, {"nu"});
  const double nu = r.number(*params, pp, "nu", Range{-1.0, 0.0, true, false}, true).value_or(0.0);
  return construct(r, pp, before, [&] { return DaughterSpec(nu); }).value_or(DaughterSpec());
}

RateFunction read_rate(Reader& r, const json& root, const char* key) {
  if (!root.contains(key)) return RateFunction();
  const std::string path = std::string("/") + key;
  const json* params = nullptr;
  const std::size_t before = r.errors.size();
  const auto kind = descriptor(r, root.at(key), path, params);
  if (!kind) return RateFunction();
  const json& p = *params;
  const std::string pp = path + "/params";
  RateFunction::Variant v = ConstantRate{0.0};
  if (*kind == "affine") {
    r.allow(p, pp, {"slope", "intercept"});
    v = AffineRate{r.number_or(p, pp, "slope", kNonneg, 0.0),
                   r.number_or(p, pp, "intercept", kNonneg, 0.0)};
  } else if (*kind == "power_law") {
    r.allow(p, pp, {"coef", "exponent"});
    v = PowerLawRate{r.number(p, pp, "coef", kNonneg, true).value_or(0.0),
                     r.number(p, pp, "exponent", kUnit, true).value_or(0.0)};
  } else if (*kind == "constant") {
    r.allow(p, pp, {"value"});
    v = ConstantRate{r.number(p, pp, "value", kNonneg, true).value_or(0.0)};
  } else if (*kind == "table") {
    r.allow(p, pp, {"u", "values"});
    TableRate t;
    t.u = r.numbers(p, pp, "u", kNonneg, true, 2).value_or(std::vector<double>{});
    t.values = r.numbers(p, pp, "values", kNonneg, true, 2).value_or(std::vector<double>{});
    v = std::move(t);
  } else {
    unknown_kind(r, path, *kind, "affine, power_law, constant, table");
  }
  return construct(r, pp, before, [&] { return RateFunction(v); }).value_or(RateFunction());
}

GridSpec read_grid(Reader& r, const json& root) {
  GridSpec g;
  const std::string path = "/grid";
  if (!root.contains("grid")) {
    r.fail(path, "required object is missing (no default grid size)");
    return g;
  }
  const json& d = root.at("grid");
  if (!r.object(d, path)) return g;
  r.allow(d, path, {"u_max", "cells", "scheme", "ratio"});
  g.u_max = r.number(d, path, "u_max", kPositive, true).value_or(0.0);
  g.cells = static_cast<std::size_t>(r.integer(d, path, "cells", 2, 100000, true).value_or(0));
  if (auto s = r.string(d, path, "scheme", false)) {
    if (*s == "uniform" || *s == "geometric") {
      g.scheme = parse_scheme(*s);
    } else {
      r.fail(path + "/scheme", fmt::format("unknown scheme '{}' (allowed: uniform, geometric)", *s));
    }
  }
  g.ratio = r.number_or(d, path, "ratio", Range{1.0, kInf, true, true}, g.ratio);
  return g;
}

InitialSpec read_initial(Reader& r, const json& root, std::size_t cells) {
  if (!root.contains("initial")) return ExpDecayInitial{};
  const std::string path = "/initial";
  const json* params = nullptr;
  const auto kind = descriptor(r, root.at("initial"), path, params);
  if (!kind) return ExpDecayInitial{};
  const json& p = *params;
  const std::string pp = path + "/params";
  if (*kind == "exp_decay") {
    r.allow(p, pp, {"amplitude", "scale"});
    return ExpDecayInitial{r.number_or(p, pp, "amplitude", kNonneg, 1.0),
                           r.number_or(p, pp, "scale", kPositive, 1.0)};
  }
  if (*kind == "monodisperse") {
    r.allow(p, pp, {"cell", "density"});
    const long long hi = cells > 0 ? static_cast<long long>(cells) - 1 : 0;
    MonodisperseInitial m;
    m.cell = static_cast<std::size_t>(r.integer(p, pp, "cell", 0, hi, true).value_or(0));
    m.density = r.number(p, pp, "density", kNonneg, true).value_or(0.0);
    return m;
  }
  if (*kind == "table") {
    r.allow(p, pp, {"u", "xi"});
    TableInitial t;
    t.u = r.numbers(p, pp, "u", kNonneg, true, 2).value_or(std::vector<double>{});
    t.xi = r.numbers(p, pp, "xi", kNonneg, true, 2).value_or(std::vector<double>{});
    if (!t.u.empty() && !t.xi.empty() && t.u.size() != t.xi.size()) {
      r.fail(pp, fmt::format("u and xi lengths differ ({} vs {})", t.u.size(), t.xi.size()));
    }
    r.increasing(t.u, pp + "/u");
    return t;
  }
  unknown_kind(r, path, *kind, "exp_decay, monodisperse, table");
  return ExpDecayInitial{};
}

void read_stepper(Reader& r, const json& root, RunConfig& cfg) {
  StepperConfig& s = cfg.stepper;
  s.t_end = 1.0;
  const json empty = json::object();
  const json* dp = &empty;
  const std::string path = "/stepper";
  if (root.contains("stepper")) {
    if (!r.object(root.at("stepper"), path)) return;
    dp = &root.at("stepper");
  }
  const json& d = *dp;
  r.allow(d, path,
          {"t_end", "output_times", "output_spacing", "output_log", "safety", "dt_max", "method",
           "threads"});
  s.t_end = r.number_or(d, path, "t_end", kNonneg, 1.0);
  s.safety = r.number_or(d, path, "safety", Range{0.0, 1.0, true, false}, 0.9);
  s.dt_max = r.number_or(d, path, "dt_max", kPositive, 1.0);
  if (auto m = r.string(d, path, "method", false)) {
    if (*m == "euler" || *m == "ssp_rk2") {
      s.method = parse_method(*m);
    } else {
      r.fail(path + "/method", fmt::format("unknown method '{}' (allowed: euler, ssp_rk2)", *m));
    }
  }
  cfg.threads = static_cast<unsigned>(r.integer(d, path, "threads", 1, 256, false).value_or(1));

  const int modes = int(d.contains("output_times")) + int(d.contains("output_spacing")) +
                    int(d.contains("output_log"));
  if (modes > 1) {
    r.fail(path, "give at most one of output_times, output_spacing, output_log");
    return;
  }
  const Range within{0.0, s.t_end, false, false};
  if (d.contains("output_times")) {
    auto times = r.numbers(d, path, "output_times", within, true, 0);
    if (times && r.increasing(*times, path + "/output_times")) s.output_times = *times;
  } else if (d.contains("output_log")) {
    const std::string lp = path + "/output_log";
    const json& l = d.at("output_log");
    if (!r.object(l, lp)) return;
    r.allow(l, lp, {"first", "count"});
    const auto first = r.number(l, lp, "first", Range{0.0, s.t_end, true, false}, true);
    const auto count = r.integer(l, lp, "count", 2, 100000, true);
    if (first && count) {
      for (long long k = 0; k < *count; ++k) {
        const double t = *first * std::pow(s.t_end / *first, double(k) / double(*count - 1));
        s.output_times.push_back(std::min(t, s.t_end));
      }
      s.output_times.back() = s.t_end;
      s.output_times.erase(std::unique(s.output_times.begin(), s.output_times.end()),
                           s.output_times.end());
    }
  } else {
    const double h = r.number_or(d, path, "output_spacing", kPositive,
                                 s.t_end > 0.0 ? s.t_end / 10.0 : 1.0);
    if (s.t_end > 0.0) {
      const auto count = static_cast<long long>(std::floor(s.t_end / h * (1.0 + 1e-12)));
      if (count > 1000000) {
        r.fail(path + "/output_spacing", "more than 1e6 output times");
        return;
      }
      for (long long k = 1; k <= count; ++k) s.output_times.push_back(std::min(double(k) * h, s.t_end));
      s.output_times.erase(std::unique(s.output_times.begin(), s.output_times.end()),
                           s.output_times.end());
    }
  }
}

void read_truncation(Reader& r, const json& root, RunConfig& cfg) {
  if (!root.contains("truncation")) return;
  const std::string path = "/truncation";
  const json& d = root.at("truncation");
  if (!r.object(d, path)) return;
  r.allow(d, path, {"level", "growth_floor"});
  cfg.truncation.level = r.number(d, path, "level", kPositive, false);
  if (auto b = r.boolean(d, path, "growth_floor")) cfg.truncation.growth_floor = *b;
}

void read_experiment(Reader& r, const json& root, RunConfig& cfg) {
  if (!root.contains("experiment")) return;
  const std::string path = "/experiment";
  const json& d = root.at("experiment");
  if (!r.object(d, path)) return;
  r.allow(d, path, {"select", "epsilons", "levels", "fit_window", "tolerance"});
  ExperimentConfig e;
  if (auto s = r.string(d, path, "select", true)) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), *s) == names.end()) {
      std::string allowed;
      for (const auto& n : names) allowed += (allowed.empty() ? "" : ", ") + n;
      r.fail(path + "/select", fmt::format("unknown experiment '{}' (allowed: {})", *s, allowed));
    }
    e.select = *s;
  }
  if (auto eps = r.numbers(d, path, "epsilons", kPositive, false)) e.epsilons = *eps;
  if (auto lv = r.numbers(d, path, "levels", kPositive, false)) {
    if (r.increasing(*lv, path + "/levels")) e.levels = *lv;
  }
  if (auto w = r.numbers(d, path, "fit_window", kPositive, false, 2)) {
    if (w->size() != 2 || !((*w)[1] > (*w)[0])) {
      r.fail(path + "/fit_window", "expected [t_lo, t_hi] with 0 < t_lo < t_hi");
    } else {
      e.fit_lo = (*w)[0];
      e.fit_hi = (*w)[1];
    }
  }
  e.tolerance = r.number_or(d, path, "tolerance", kPositive, e.tolerance);
  cfg.experiment = e;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k < std::min(byte ? byte - 1 : 0, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json kernel_json(const CoagulationKernel& k) {
  json params = json::object();
  std::visit(Overloaded{
                 [](const LinearShear&) {},
                 [](const NonlinearShear&) {},
                 [](const Gravitational&) {},
                 [&](const ModifiedSmoluchowski& v) { params["c"] = v.c; },
                 [&](const ActivatedSludge& v) {
                   params["q"] = v.q;
                   params["u_c"] = v.u_c;
                 },
                 [&](const ProductKernel& v) { params["omega"] = v.omega; },
                 [&](const ConstantKernel& v) { params["value"] = v.value; },
                 [&](const TableKernel& v) {
                   params["sizes"] = v.sizes;
                   params["values"] = v.values;
                 },
             },
             k.variant());
  return {{"kind", k.kind()}, {"params", params}};
}

json rate_json(const RateFunction& f) {
  json params = json::object();
  std::visit(Overloaded{
                 [&](const AffineRate& v) {
                   params["slope"] = v.slope;
                   params["intercept"] = v.intercept;
                 },
                 [&](const PowerLawRate& v) {
                   params["coef"] = v.coef;
                   params["exponent"] = v.exponent;
                 },
                 [&](const ConstantRate& v) { params["value"] = v.value; },
                 [&](const TableRate& v) {
                   params["u"] = v.u;
                   params["values"] = v.values;
                 },
             },
             f.variant());
  return {{"kind", f.kind()}, {"params", params}};
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"constant_kernel_benchmark",
                                                 "truncation_convergence", "stability",
                                                 "longtime_zeroth", "longtime_first"};
  return names;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::string msg = e.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError({fmt::format("parse error at line {}, column {}: {}", line, col, msg)});
  }
  Reader r;
  RunConfig cfg;
  if (!r.object(root, "")) throw ConfigError(r.errors);
  r.allow(root, "",
          {"coagulation", "fragmentation", "daughter", "growth", "death", "birth", "grid",
           "initial", "stepper", "truncation", "experiment", "output_dir", "seed"});
  cfg.coefficients.coag = read_kernel(r, root);
  cfg.coefficients.frag = read_fragmentation(r, root);
  cfg.coefficients.daughter = read_daughter(r, root);
  cfg.coefficients.growth = read_rate(r, root, "growth");
  cfg.coefficients.death = read_rate(r, root, "death");
  cfg.coefficients.birth = read_rate(r, root, "birth");
  cfg.grid = read_grid(r, root);
  cfg.initial = read_initial(r, root, cfg.grid.cells);
  read_stepper(r, root, cfg);
  read_truncation(r, root, cfg);
  read_experiment(r, root, cfg);
  if (auto dir = r.string(root, "", "output_dir", false)) {
    if (dir->empty()) {
      r.fail("/output_dir", "must not be empty");
    } else {
      cfg.output_dir = *dir;
    }
  }
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      r.fail("/seed", "expected a nonnegative integer");
    } else {
      cfg.seed = s.get<std::uint64_t>();
    }
  }
  if (r.errors.empty()) {
    try {
      SizeGrid check(cfg.grid);
    } catch (const ParameterError& e) {
      r.fail("/grid", e.what());
    }
  }
  if (!r.errors.empty()) throw ConfigError(r.errors);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({fmt::format("cannot open config file '{}'", path)});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json to_json(const CoefficientSet& set) {
  json out;
  out["coagulation"] = kernel_json(set.coag);
  out["fragmentation"] = {{"kind", "power_law"},
                          {"params", {{"l0", set.frag.l0()}, {"l1", set.frag.l1()}}}};
  out["daughter"] = {{"kind", "power_law"}, {"params", {{"nu", set.daughter.nu()}}}};
  out["growth"] = rate_json(set.growth);
  out["death"] = rate_json(set.death);
  out["birth"] = rate_json(set.birth);
  return out;
}

json to_json(const RunConfig& cfg) {
  json out = to_json(cfg.coefficients);
  out["grid"] = {{"u_max", cfg.grid.u_max},
                 {"cells", cfg.grid.cells},
                 {"scheme", to_string(cfg.grid.scheme)},
                 {"ratio", cfg.grid.ratio}};
  out["initial"] = std::visit(
      Overloaded{
          [](const ExpDecayInitial& v) -> json {
            return {{"kind", "exp_decay"},
                    {"params", {{"amplitude", v.amplitude}, {"scale", v.scale}}}};
          },
          [](const MonodisperseInitial& v) -> json {
            return {{"kind", "monodisperse"}, {"params", {{"cell", v.cell}, {"density", v.density}}}};
          },
          [](const TableInitial& v) -> json {
            return {{"kind", "table"}, {"params", {{"u", v.u}, {"xi", v.xi}}}};
          },
      },
      cfg.initial);
  out["stepper"] = {{"t_end", cfg.stepper.t_end},
                    {"output_times", cfg.stepper.output_times},
                    {"safety", cfg.stepper.safety},
                    {"dt_max", cfg.stepper.dt_max},
                    {"method", to_string(cfg.stepper.method)},
                    {"threads", cfg.threads}};
  json trunc = {{"growth_floor", cfg.truncation.growth_floor}};
  if (cfg.truncation.level) trunc["level"] = *cfg.truncation.level;
  out["truncation"] = trunc;
  if (cfg.experiment) {
    const auto& e = *cfg.experiment;
    out["experiment"] = {{"select", e.select},
                         {"epsilons", e.epsilons},
                         {"levels", e.levels},
                         {"fit_window", {e.fit_lo, e.fit_hi}},
                         {"tolerance", e.tolerance}};
  }
  out["output_dir"] = cfg.output_dir;
  out["seed"] = cfg.seed;
  return out;
}

std::string config_digest(const RunConfig& config) {
  // threads is a performance knob; results do not depend on it.
  json canonical = to_json(config);
  canonical["stepper"].erase("threads");
  const std::string text = canonical.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

CoefficientSet effective_coefficients(const RunConfig& config) {
  if (!config.truncation.level) return config.coefficients;
  return truncate_coefficients(config.coefficients, *config.truncation.level,
                               config.truncation.growth_floor);
}

std::shared_ptr<const SizeGrid> make_grid(const RunConfig& config) {
  return std::make_shared<const SizeGrid>(config.grid);
}

StateVector initial_state(const InitialSpec& spec, std::shared_ptr<const SizeGrid> grid) {
  const std::size_t n = grid->size();
  std::vector<double> xi(n, 0.0);
  std::visit(Overloaded{
                 [&](const ExpDecayInitial& v) {
                   for (std::size_t i = 0; i < n; ++i) {
                     const double w = grid->width(i);
                     xi[i] = v.amplitude * v.scale * std::exp(-grid->edge(i) / v.scale) *
                             -std::expm1(-w / v.scale) / w;
                   }
                 },
                 [&](const MonodisperseInitial& v) {
                   if (v.cell >= n) {
                     throw ParameterError(
                         fmt::format("monodisperse cell {} outside grid of {} cells", v.cell, n));
                   }
                   xi[v.cell] = v.density;
                 },
                 [&](const TableInitial& v) {
                   for (std::size_t i = 0; i < n; ++i) {
                     const double x = grid->pivot(i);
                     if (x < v.u.front() || x > v.u.back()) continue;
                     const auto it = std::upper_bound(v.u.begin(), v.u.end(), x);
                     const std::size_t k = std::min<std::size_t>(
                         static_cast<std::size_t>(it - v.u.begin()), v.u.size() - 1);
                     const double s = (x - v.u[k - 1]) / (v.u[k] - v.u[k - 1]);
                     xi[i] = (1.0 - s) * v.xi[k - 1] + s * v.xi[k];
                   }
                 },
             },
             spec);
  return StateVector(std::move(grid), 0.0, std::move(xi));
}

}  // namespace gcf
