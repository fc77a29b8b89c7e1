#include "gcf/integrator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace gcf {

std::string to_string(Method method) { return method == Method::Euler ? "euler" : "ssp_rk2"; }

Method parse_method(const std::string& name) {
  if (name == "euler") return Method::Euler;
  if (name == "ssp_rk2") return Method::SspRk2;
  throw ParameterError(fmt::format("unknown method '{}' (expected euler|ssp_rk2)", name));
}

void StepperConfig::validate() const {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw ParameterError(fmt::format("t_end must be finite and >= 0, got {}", t_end));
  }
  if (!(safety > 0.0 && safety <= 1.0)) {
    throw ParameterError(fmt::format("safety must lie in (0, 1], got {}", safety));
  }
  if (!(dt_max > 0.0)) throw ParameterError(fmt::format("dt_max must be > 0, got {}", dt_max));
  for (std::size_t k = 0; k < output_times.size(); ++k) {
    const double t = output_times[k];
    if (!(t >= 0.0 && t <= t_end)) {
      throw ParameterError(fmt::format("output time {} outside [0, {}]", t, t_end));
    }
    if (k > 0 && !(t > output_times[k - 1])) {
      throw ParameterError("output times must be strictly increasing");
    }
  }
}

std::vector<double> StepperConfig::schedule() const {
  std::vector<double> times = output_times;
  times.push_back(0.0);
  times.push_back(t_end);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

std::size_t Trajectory::index_of(double t) const {
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    if (snapshots[k].t == t) return k;
  }
  throw std::out_of_range(fmt::format("no snapshot at t = {}", t));
}

double stable_dt(const ModelTables& tables, const RhsTerms& terms, const StepperConfig& cfg) {
  double lambda = 0.0;
  for (double v : terms.loss_coefficient) lambda = std::max(lambda, v);
  double cfl = kInf;
  for (std::size_t i = 0; i < tables.growth.size(); ++i) {
    cfl = std::min(cfl, tables.spacing[i] / std::max(tables.growth[i], cfg.eps_g));
  }
  const double bound = std::min(cfl, lambda > 0.0 ? 1.0 / lambda : kInf);
  return std::min(cfg.dt_max, cfg.safety * bound);
}

namespace {

double max_loss(const RhsTerms& terms) {
  double m = 0.0;
  for (double v : terms.loss_coefficient) m = std::max(m, v);
  return m;
}

struct Clamp {
  double mass = 0.0;
  std::size_t count = 0;
};

Clamp clamp_negatives(std::vector<double>& xi, const SizeGrid& grid, double reference) {
  double scale = reference;
  for (double v : xi) scale = std::max(scale, v);
  const double threshold = 1e-14 * scale;
  Clamp c;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (!std::isfinite(xi[i])) {
      throw StabilityError(fmt::format("non-finite value in cell {}", i));
    }
    if (xi[i] >= 0.0) continue;
    if (xi[i] < -threshold) {
      throw StabilityError(fmt::format(
          "cell {} went negative ({:.3e} below threshold {:.3e}); time step too large", i, xi[i],
          -threshold));
    }
    c.mass -= grid.pivot(i) * xi[i] * grid.width(i);
    ++c.count;
    xi[i] = 0.0;
  }
  return c;
}

void add_fluxes(Ledger& ledger, const RhsTerms& r, double w) {
  ledger.overflow_mass += w * r.overflow_mass_rate();
  ledger.overflow_number += w * r.overflow_number_rate();
  ledger.renewal_number += w * r.renewal_number_rate;
  ledger.renewal_mass += w * r.renewal_mass_rate;
  ledger.death_number += w * r.death_number_rate;
  ledger.death_mass += w * r.death_mass_rate;
  ledger.growth_mass += w * r.growth_mass_rate;
}

double max_value(const std::vector<double>& xi) {
  double m = 0.0;
  for (double v : xi) m = std::max(m, v);
  return m;
}

std::optional<StateVector> advance(const StateVector& state, const RhsTerms& r0,
                                   const ModelTables& tables, double dt, Method method,
                                   Ledger& ledger) {
  if (dt * max_loss(r0) > 1.0) return std::nullopt;
  const SizeGrid& grid = *tables.grid;
  const std::size_t n = grid.size();
  const double ref = max_value(state.xi);

  StateVector s1(state.grid, state.t + dt, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) s1.xi[i] = state.xi[i] + dt * r0.total(i);
  const Clamp c1 = clamp_negatives(s1.xi, grid, ref);

  if (method == Method::Euler) {
    s1.overflow_mass = state.overflow_mass + dt * r0.overflow_mass_rate();
    add_fluxes(ledger, r0, dt);
    ledger.clamp_mass += c1.mass;
    ledger.clamp_count += c1.count;
    ++ledger.steps;
    return s1;
  }

  const RhsTerms r1 = total_rhs(s1, tables);
  if (dt * max_loss(r1) > 1.0) return std::nullopt;
  StateVector s2(state.grid, state.t + dt, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    s2.xi[i] = 0.5 * state.xi[i] + 0.5 * (s1.xi[i] + dt * r1.total(i));
  }
  const Clamp c2 = clamp_negatives(s2.xi, grid, ref);
  s2.overflow_mass =
      state.overflow_mass + 0.5 * dt * (r0.overflow_mass_rate() + r1.overflow_mass_rate());
  add_fluxes(ledger, r0, 0.5 * dt);
  add_fluxes(ledger, r1, 0.5 * dt);
  ledger.clamp_mass += 0.5 * c1.mass + c2.mass;
  ledger.clamp_count += c1.count + c2.count;
  ++ledger.steps;
  return s2;
}

MomentRecord record(const StateVector& s, const Ledger& ledger) {
  MomentRecord m = moment_record(s);
  m.overflow_mass = ledger.overflow_mass;
  m.renewal_number = ledger.renewal_number;
  m.renewal_mass_artifact = ledger.renewal_mass;
  return m;
}

}  // namespace

std::optional<StateVector> try_step(const StateVector& state, const ModelTables& tables, double dt,
                                    Method method, Ledger& ledger) {
  if (!(dt >= 0.0)) throw ParameterError(fmt::format("time step must be >= 0, got {}", dt));
  return advance(state, total_rhs(state, tables), tables, dt, method, ledger);
}

StateVector step(const StateVector& state, const ModelTables& tables, double dt, Method method,
                 Ledger& ledger) {
  auto next = try_step(state, tables, dt, method, ledger);
  if (!next) {
    throw StabilityError(fmt::format("time step {} exceeds the stage stability bound", dt));
  }
  return std::move(*next);
}

Trajectory run(const StateVector& initial, const ModelTables& tables, const StepperConfig& cfg) {
  cfg.validate();
  initial.validate();
  if (!initial.grid->same_as(*tables.grid)) {
    throw DomainError("initial state grid does not match the operator tables");
  }
  Trajectory traj;
  const std::vector<double> times = cfg.schedule();
  StateVector state = initial;
  state.t = 0.0;
  traj.snapshots.push_back(state);
  traj.moments.push_back(record(state, traj.ledger));
  traj.ledgers.push_back(traj.ledger);

  for (std::size_t k = 1; k < times.size(); ++k) {
    const double target = times[k];
    while (state.t < target) {
      const RhsTerms r0 = total_rhs(state, tables);
      double dt = stable_dt(tables, r0, cfg);
      bool landing = false;
      if (target - state.t <= dt * (1.0 + 1e-12)) {
        dt = target - state.t;
        landing = true;
      }
      std::optional<StateVector> next;
      for (int attempt = 0; attempt < 60; ++attempt) {
        next = advance(state, r0, tables, dt, cfg.method, traj.ledger);
        if (next) break;
        ++traj.ledger.retries;
        dt *= 0.5;
        landing = false;
      }
      if (!next) {
        throw StabilityError(fmt::format("no stable step found at t = {}", state.t));
      }
      state = std::move(*next);
      if (landing) state.t = target;
    }
    traj.snapshots.push_back(state);
    traj.moments.push_back(record(state, traj.ledger));
    traj.ledgers.push_back(traj.ledger);
  }
  return traj;
}

Trajectory run(const StateVector& initial, const CoefficientSet& set, const StepperConfig& cfg,
               unsigned threads) {
  auto grid = initial.grid;
  if (!grid) throw DomainError("initial state has no grid");
  return run(initial, build_tables(grid, set, threads), cfg);
}

}  // namespace gcf
