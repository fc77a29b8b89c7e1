#include <doctest.h>

#include <cmath>
#include <memory>

#include "gcf/integrator.hpp"

using namespace gcf;

namespace {

std::shared_ptr<const SizeGrid> make(double u_max, std::size_t n, GridScheme s, double rho = 1.03) {
  return std::make_shared<const SizeGrid>(GridSpec{u_max, n, s, rho});
}

// Exact cell averages of amplitude * exp(-u).
StateVector exp_state(const std::shared_ptr<const SizeGrid>& g, double amplitude = 1.0) {
  std::vector<double> xi(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) {
    xi[i] = amplitude * (std::exp(-g->edge(i)) - std::exp(-g->edge(i + 1))) / g->width(i);
  }
  return StateVector(g, 0.0, xi);
}

StepperConfig stepper(double t_end, double dt_max = 1.0, Method m = Method::SspRk2) {
  StepperConfig c;
  c.t_end = t_end;
  c.dt_max = dt_max;
  c.method = m;
  return c;
}

CoefficientSet full_model() {
  CoefficientSet s;
  s.coag = CoagulationKernel(ProductKernel{0.5});
  s.frag = FragmentationSpec(1.0, 1.0);
  s.daughter = DaughterSpec(0.0);
  s.growth = RateFunction(AffineRate{0.1, 0.05});
  s.death = RateFunction(AffineRate{0.05, 0.05});
  s.birth = RateFunction(ConstantRate{0.1});
  return s;
}

double l1_diff(const StateVector& a, const StateVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.xi.size(); ++i) {
    s += (1.0 + a.grid->pivot(i)) * std::abs(a.xi[i] - b.xi[i]) * a.grid->width(i);
  }
  return s;
}

}  // namespace

TEST_CASE("stepper configuration") {
  CHECK(parse_method("euler") == Method::Euler);
  CHECK(parse_method(to_string(Method::SspRk2)) == Method::SspRk2);
  CHECK_THROWS_AS(parse_method("rk4"), ParameterError);
  StepperConfig c = stepper(2.0);
  c.output_times = {1.5, 0.5};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.output_times = {0.5, 3.0};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.output_times = {0.5, 1.0};
  c.safety = 1.5;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.safety = 0.9;
  CHECK_NOTHROW(c.validate());
  const std::vector<double> expected = {0.0, 0.5, 1.0, 2.0};
  CHECK(c.schedule() == expected);
}

TEST_CASE("stable time step examples") {
  auto g = make(1.0, 100, GridScheme::Uniform);
  const StateVector st = exp_state(g);
  {
    const auto tables = build_tables(g, CoefficientSet{});
    CHECK(stable_dt(tables, total_rhs(st, tables), stepper(1.0, 0.7)) == 0.7);
  }
  {
    CoefficientSet s;
    s.death = RateFunction(ConstantRate{10.0});
    const auto tables = build_tables(g, s);
    CHECK(stable_dt(tables, total_rhs(st, tables), stepper(1.0)) == doctest::Approx(0.09));
  }
  {
    CoefficientSet s;
    s.growth = RateFunction(ConstantRate{1.0});
    const auto tables = build_tables(g, s);
    CHECK(stable_dt(tables, total_rhs(st, tables), stepper(1.0)) <= 0.9 * 0.01 * (1.0 + 1e-12));
  }
}

TEST_CASE("single steps") {
  auto g = make(10.0, 50, GridScheme::Geometric, 1.05);
  const StateVector st = exp_state(g);
  Ledger ledger;
  const auto zero = build_tables(g, CoefficientSet{});
  const StateVector same = step(st, zero, 0.25, Method::SspRk2, ledger);
  CHECK(same.xi == st.xi);
  CHECK(same.t == 0.25);

  CoefficientSet s;
  s.death = RateFunction(ConstantRate{2.0});
  const auto tables = build_tables(g, s);
  const StateVector next = step(st, tables, 0.1, Method::Euler, ledger);
  for (std::size_t i = 0; i < g->size(); ++i) {
    CHECK(next.xi[i] == doctest::Approx((1.0 - 0.2) * st.xi[i]).epsilon(1e-15));
  }
  // dt * Λ = 2.4 > 1 violates the stage bound
  CHECK_FALSE(try_step(st, tables, 1.2, Method::Euler, ledger).has_value());
  CHECK_THROWS_AS(step(st, tables, 1.2, Method::SspRk2, ledger), StabilityError);
}

TEST_CASE("constant kernel: one small step decrements M0 by K M0^2 dt / 2") {
  auto g = make(50.0, 200, GridScheme::Geometric);
  CoefficientSet s;
  s.coag = CoagulationKernel(ConstantKernel{1.0});
  const auto tables = build_tables(g, s);
  const StateVector st = exp_state(g);
  const double m0 = moment(st, 0.0);
  const double dt = 1e-4;
  Ledger ledger;
  const StateVector next = step(st, tables, dt, Method::SspRk2, ledger);
  const double drop = m0 - moment(next, 0.0) - ledger.overflow_number;
  CHECK(drop == doctest::Approx(0.5 * m0 * m0 * dt).epsilon(1e-3));
}

TEST_CASE("trivial runs") {
  auto g = make(10.0, 40, GridScheme::Geometric, 1.05);
  const StateVector st = exp_state(g);
  const Trajectory none = run(st, full_model(), stepper(0.0));
  CHECK(none.size() == 1);
  CHECK(none.snapshots[0].xi == st.xi);

  const Trajectory idle = run(st, CoefficientSet{}, stepper(1.0));
  CHECK(idle.snapshots.back().xi == st.xi);
  CHECK(idle.snapshots.back().t == 1.0);
}

TEST_CASE("constant kernel halves M0 by t = 2") {
  auto g = make(50.0, 300, GridScheme::Geometric);
  CoefficientSet s;
  s.coag = CoagulationKernel(ConstantKernel{1.0});
  const StateVector st = exp_state(g);
  const double m0 = moment(st, 0.0);
  const Trajectory traj = run(st, s, stepper(2.0, 0.05));
  const double m2 = traj.moments.back().M0;
  CHECK(m2 == doctest::Approx(m0 / (1.0 + m0)).epsilon(1e-2));
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("snapshots land on output times; positivity and ledger monotonicity") {
  auto g = make(20.0, 120, GridScheme::Geometric, 1.04);
  StepperConfig c = stepper(2.0);
  for (int k = 1; k < 20; ++k) c.output_times.push_back(0.1 * k);
  const Trajectory traj = run(exp_state(g), full_model(), c);
  const auto times = c.schedule();
  REQUIRE(traj.size() == times.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(traj.snapshots[k].t == times[k]);
    CHECK(traj.moments[k].t == times[k]);
    for (double v : traj.snapshots[k].xi) CHECK(v >= 0.0);
    if (k > 0) {
      const Ledger& a = traj.ledgers[k - 1];
      const Ledger& b = traj.ledgers[k];
      CHECK(b.overflow_mass >= a.overflow_mass);
      CHECK(b.renewal_number >= a.renewal_number);
      CHECK(b.renewal_mass >= a.renewal_mass);
      CHECK(b.death_number >= a.death_number);
      CHECK(b.death_mass >= a.death_mass);
    }
  }
  CHECK(traj.index_of(1.0) == 10);
  CHECK_THROWS_AS(traj.index_of(1.05), std::out_of_range);
}

TEST_CASE("global mass accounting from the ledgers") {
  auto g = make(20.0, 150, GridScheme::Geometric, 1.04);
  for (Method m : {Method::Euler, Method::SspRk2}) {
    const Trajectory traj = run(exp_state(g), full_model(), stepper(2.0, 1.0, m));
    const double m1_0 = traj.moments.front().M1;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const Ledger& l = traj.ledgers[k];
      const double rebuilt = m1_0 + l.growth_mass + l.renewal_mass + l.clamp_mass - l.death_mass -
                             l.overflow_mass;
      CHECK(std::abs(traj.moments[k].M1 - rebuilt) <= 1e-8 * m1_0);
    }
    CHECK(traj.snapshots.back().overflow_mass == doctest::Approx(traj.ledger.overflow_mass));
  }
}

TEST_CASE("runs are deterministic and independent of the worker count") {
  auto g = make(20.0, 150, GridScheme::Geometric, 1.04);
  const StateVector st = exp_state(g);
  const Trajectory a = run(st, full_model(), stepper(0.5), 1);
  const Trajectory b = run(st, full_model(), stepper(0.5), 1);
  const Trajectory c = run(st, full_model(), stepper(0.5), 4);
  CHECK(a.snapshots.back().xi == b.snapshots.back().xi);
  CHECK(a.snapshots.back().xi == c.snapshots.back().xi);
  CHECK(a.ledger.overflow_mass == c.ledger.overflow_mass);
  CHECK(a.ledger.steps == c.ledger.steps);
}

TEST_CASE("time convergence order: Euler first, SSP-RK2 second") {
  auto g = make(20.0, 60, GridScheme::Geometric, 1.08);
  CoefficientSet s;
  s.coag = CoagulationKernel(ConstantKernel{1.0});
  const StateVector st = exp_state(g, 2.0);
  for (Method m : {Method::Euler, Method::SspRk2}) {
    std::vector<StateVector> finals;
    for (double dt : {0.04, 0.02, 0.01, 0.005}) finals.push_back(run(st, s, stepper(1.0, dt, m)).snapshots.back());
    const double d1 = l1_diff(finals[0], finals[1]);
    const double d2 = l1_diff(finals[1], finals[2]);
    const double d3 = l1_diff(finals[2], finals[3]);
    const double order = m == Method::Euler ? 2.0 : 4.0;
    CAPTURE(to_string(m));
    CHECK(d1 / d2 == doctest::Approx(order).epsilon(0.15));
    CHECK(d2 / d3 == doctest::Approx(order).epsilon(0.15));
  }
}

TEST_CASE("run validates its inputs") {
  auto g = make(10.0, 40, GridScheme::Geometric, 1.05);
  auto h = make(10.0, 41, GridScheme::Geometric, 1.05);
  StateVector bad = exp_state(g);
  bad.xi[3] = -1.0;
  CHECK_THROWS_AS(run(bad, CoefficientSet{}, stepper(1.0)), DomainError);
  const auto tables = build_tables(h, CoefficientSet{});
  CHECK_THROWS_AS(run(exp_state(g), tables, stepper(1.0)), DomainError);
  StepperConfig c = stepper(-1.0);
  CHECK_THROWS_AS(run(exp_state(g), CoefficientSet{}, c), ParameterError);
}
