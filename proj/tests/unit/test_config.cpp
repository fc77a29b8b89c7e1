#include <doctest.h>

#include <cmath>
#include <string>

#include "gcf/config.hpp"
#include "gcf/moments.hpp"

using namespace gcf;

namespace {

const char* kMinimal = R"({
  "coagulation": {"kind": "constant", "params": {"value": 1.0}},
  "grid": {"u_max": 10, "cells": 50}
})";

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("minimal document takes the documented defaults") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.coefficients.coag.kind() == "constant");
  CHECK(c.coefficients.coag(1.0, 2.0) == 1.0);
  CHECK(c.coefficients.frag.is_zero());
  CHECK(c.coefficients.daughter.nu() == 0.0);
  CHECK(c.coefficients.growth.is_zero());
  CHECK(c.coefficients.death.is_zero());
  CHECK(c.coefficients.birth.is_zero());
  CHECK(c.grid.u_max == 10.0);
  CHECK(c.grid.cells == 50);
  CHECK(c.grid.scheme == GridScheme::Geometric);
  CHECK(c.grid.ratio == doctest::Approx(std::cbrt(2.0)));
  CHECK(c.stepper.t_end == 1.0);
  CHECK(c.stepper.safety == 0.9);
  CHECK(c.stepper.dt_max == 1.0);
  CHECK(c.stepper.method == Method::SspRk2);
  CHECK(c.stepper.output_times.size() == 10);
  CHECK(c.stepper.output_times.back() == 1.0);
  CHECK(c.threads == 1);
  CHECK(std::holds_alternative<ExpDecayInitial>(c.initial));
  CHECK_FALSE(c.truncation.level.has_value());
  CHECK(c.truncation.growth_floor);
  CHECK_FALSE(c.experiment.has_value());
  CHECK(c.output_dir == "out");
  CHECK(c.seed == 0);
}

TEST_CASE("out-of-range omega names its allowed range") {
  const auto v = violations_of(R"({
    "coagulation": {"kind": "product", "params": {"omega": 1.2}},
    "grid": {"u_max": 10, "cells": 50}
  })");
  REQUIRE(v.size() == 1);
  CHECK(mentions(v, "/coagulation/params/omega"));
  CHECK(mentions(v, "[0, 1)"));
}

TEST_CASE("missing grid is an error, not a default") {
  const auto v = violations_of(R"({"coagulation": {"kind": "constant", "params": {"value": 1}}})");
  REQUIRE_FALSE(v.empty());
  CHECK(mentions(v, "/grid"));
}

TEST_CASE("every violation is reported at once") {
  const auto v = violations_of(R"({
    "coagulation": {"kind": "product", "params": {"omega": -1}},
    "fragmentation": {"kind": "power_law", "params": {"l0": 1, "l1": 2}},
    "daughter": {"kind": "power_law", "params": {"nu": -1}},
    "grid": {"u_max": -3, "cells": 1, "colour": "blue"},
    "stepper": {"safety": 0, "method": "rk4"},
    "bogus": true
  })");
  CHECK(v.size() >= 8);
  CHECK(mentions(v, "/coagulation/params/omega"));
  CHECK(mentions(v, "/fragmentation/params/l1"));
  CHECK(mentions(v, "/daughter/params/nu"));
  CHECK(mentions(v, "/grid/u_max"));
  CHECK(mentions(v, "/grid/cells"));
  CHECK(mentions(v, "/grid/colour"));
  CHECK(mentions(v, "/stepper/safety"));
  CHECK(mentions(v, "/stepper/method"));
  CHECK(mentions(v, "/bogus"));
}

TEST_CASE("malformed JSON reports line and column") {
  try {
    parse_config("{\n  \"grid\": {\"u_max\": 10,,}\n}");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("output time modes") {
  const RunConfig spacing = parse_config(R"({"grid": {"u_max": 1, "cells": 4},
    "stepper": {"t_end": 2, "output_spacing": 0.5}})");
  const std::vector<double> expected = {0.5, 1.0, 1.5, 2.0};
  CHECK(spacing.stepper.output_times == expected);

  const RunConfig log = parse_config(R"({"grid": {"u_max": 1, "cells": 4},
    "stepper": {"t_end": 100, "output_log": {"first": 1, "count": 3}}})");
  REQUIRE(log.stepper.output_times.size() == 3);
  CHECK(log.stepper.output_times[0] == 1.0);
  CHECK(log.stepper.output_times[1] == doctest::Approx(10.0));
  CHECK(log.stepper.output_times[2] == 100.0);

  CHECK(mentions(violations_of(R"({"grid": {"u_max": 1, "cells": 4},
    "stepper": {"t_end": 1, "output_spacing": 0.1, "output_times": [0.5]}})"),
                 "at most one"));
  CHECK(mentions(violations_of(R"({"grid": {"u_max": 1, "cells": 4},
    "stepper": {"t_end": 1, "output_times": [0.5, 0.2]}})"),
                 "/stepper/output_times"));
  CHECK(mentions(violations_of(R"({"grid": {"u_max": 1, "cells": 4},
    "stepper": {"t_end": 1, "output_times": [2.0]}})"),
                 "/stepper/output_times"));
}

TEST_CASE("canonical JSON round-trips and the digest is stable") {
  const std::string full = R"({
    "coagulation": {"kind": "activated_sludge", "params": {"q": 1.5, "u_c": 2}},
    "fragmentation": {"kind": "power_law", "params": {"l0": 0.5, "l1": 0.25}},
    "daughter": {"kind": "power_law", "params": {"nu": -0.5}},
    "growth": {"kind": "affine", "params": {"slope": 0.1, "intercept": 0.05}},
    "death": {"kind": "power_law", "params": {"coef": 0.2, "exponent": 0.5}},
    "birth": {"kind": "table", "params": {"u": [0, 1, 2], "values": [0.1, 0.3, 0.2]}},
    "grid": {"u_max": 25, "cells": 80, "scheme": "geometric", "ratio": 1.05},
    "initial": {"kind": "monodisperse", "params": {"cell": 3, "density": 2}},
    "stepper": {"t_end": 3, "output_times": [0.5, 1.5], "method": "euler", "threads": 2},
    "truncation": {"level": 12, "growth_floor": false},
    "experiment": {"select": "stability", "epsilons": [0.01, 0.001]},
    "output_dir": "results",
    "seed": 42
  })";
  const RunConfig a = parse_config(full);
  const nlohmann::json j = to_json(a);
  const RunConfig b = parse_config(j.dump());
  CHECK(to_json(b) == j);
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  CHECK(config_digest(a).find_first_not_of("0123456789abcdef") == std::string::npos);

  RunConfig threads = a;
  threads.threads = 8;
  CHECK(config_digest(threads) == config_digest(a));
  RunConfig other = a;
  other.grid.cells = 81;
  CHECK(config_digest(other) != config_digest(a));

  // Whitespace and key order do not matter.
  const RunConfig c = parse_config(
      R"({"grid":{"cells":50,"u_max":10},"coagulation":{"params":{"value":1.0},"kind":"constant"}})");
  CHECK(config_digest(c) == config_digest(parse_config(kMinimal)));
}

TEST_CASE("initial data") {
  auto grid = std::make_shared<const SizeGrid>(GridSpec{30.0, 120, GridScheme::Geometric, 1.04});
  const StateVector e = initial_state(ExpDecayInitial{2.0, 1.5}, grid);
  // exact cell averages: M0 = amplitude * scale * (1 - exp(-U/scale))
  CHECK(moment(e, 0.0) == doctest::Approx(2.0 * 1.5 * -std::expm1(-30.0 / 1.5)).epsilon(1e-13));

  const StateVector m = initial_state(MonodisperseInitial{0, 3.0}, grid);
  CHECK(m.xi[0] == 3.0);
  for (std::size_t i = 1; i < grid->size(); ++i) CHECK(m.xi[i] == 0.0);
  CHECK_THROWS_AS(initial_state(MonodisperseInitial{120, 1.0}, grid), ParameterError);

  const StateVector t = initial_state(TableInitial{{1.0, 3.0}, {2.0, 4.0}}, grid);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double x = grid->pivot(i);
    if (x < 1.0 || x > 3.0) {
      CHECK(t.xi[i] == 0.0);
    } else {
      CHECK(t.xi[i] == doctest::Approx(2.0 + (x - 1.0)));
    }
  }
  CHECK(mentions(violations_of(R"({"grid": {"u_max": 1, "cells": 4},
    "initial": {"kind": "monodisperse", "params": {"cell": 4, "density": 1}}})"),
                 "/initial/params/cell"));
}

TEST_CASE("truncation and experiment blocks") {
  const RunConfig c = parse_config(R"({
    "death": {"kind": "affine", "params": {"slope": 1}},
    "grid": {"u_max": 10, "cells": 20},
    "truncation": {"level": 5},
    "experiment": {"select": "longtime_first", "fit_window": [20, 80], "levels": [5, 10]}
  })");
  const CoefficientSet eff = effective_coefficients(c);
  CHECK(eff.death(7.0) == 0.0);
  CHECK(eff.growth(1.0) == doctest::Approx(0.2));
  REQUIRE(c.experiment.has_value());
  CHECK(c.experiment->select == "longtime_first");
  CHECK(c.experiment->fit_lo == 20.0);
  CHECK(c.experiment->fit_hi == 80.0);
  CHECK(c.experiment->levels.size() == 2);
  CHECK(mentions(violations_of(R"({"grid": {"u_max": 1, "cells": 4},
    "experiment": {"select": "everything"}})"),
                 "/experiment/select"));
  CHECK(experiment_names().size() == 5);
}
