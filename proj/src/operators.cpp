#include "gcf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>

namespace gcf {

StateVector::StateVector(std::shared_ptr<const SizeGrid> g, double time, std::vector<double> values)
    : grid(std::move(g)), t(time), xi(std::move(values)) {}

void StateVector::validate() const {
  if (!grid) throw DomainError("state has no grid");
  if (xi.size() != grid->size()) {
    throw DomainError(
        fmt::format("state has {} values for a grid of {} cells", xi.size(), grid->size()));
  }
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (!std::isfinite(xi[i]) || xi[i] < 0.0) {
      throw DomainError(fmt::format("state value xi[{}] = {} is not finite and nonnegative", i, xi[i]));
    }
  }
}

RhsTerms::RhsTerms(std::size_t n)
    : coag_gain(n, 0.0),
      coag_loss(n, 0.0),
      frag_gain(n, 0.0),
      frag_loss(n, 0.0),
      growth_div(n, 0.0),
      death(n, 0.0),
      renewal_inflow(n, 0.0),
      loss_coefficient(n, 0.0) {}

double RhsTerms::total(std::size_t i) const {
  return coag_gain[i] + coag_loss[i] + frag_gain[i] + frag_loss[i] + growth_div[i] + death[i] +
         renewal_inflow[i];
}

std::vector<double> RhsTerms::total() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = total(i);
  return out;
}

FragmentationTable::FragmentationTable(const SizeGrid& grid, const DaughterSpec& daughter) {
  const std::size_t n = grid.size();
  number_.assign(n * (n + 1) / 2, 0.0);
  self_.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double xj = grid.pivot(j);
    double mass = 0.0;
    for (std::size_t i = 0; i <= j; ++i) {
      const double nij = daughter.number_between(grid.edge(i), grid.edge(i + 1), xj);
      number_[offset(j) + i] = nij;
      mass += grid.pivot(i) * nij;
    }
    self_[j] = number_[offset(j) + j] + (xj - mass) / xj;
  }
}

ModelTables build_tables(std::shared_ptr<const SizeGrid> grid,
                         std::shared_ptr<const PairAllocation> alloc, const CoefficientSet& set,
                         unsigned threads) {
  if (!grid) throw ParameterError("tables need a grid");
  if (!alloc || alloc->cells() != grid->size()) {
    throw ParameterError("pair allocation does not match the grid");
  }
  const std::size_t n = grid->size();
  ModelTables t;
  t.grid = grid;
  t.alloc = std::move(alloc);
  t.coefficients = set;
  t.threads = std::max(1u, threads);
  t.has_coagulation = !set.coag.is_zero();
  t.has_fragmentation = !set.frag.is_zero();

  t.kernel.assign(n * n, 0.0);
  if (t.has_coagulation) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double v = set.coag.evaluate(grid->pivot(i), grid->pivot(j));
        t.kernel[i * n + j] = v;
        t.kernel[j * n + i] = v;
      }
    }
  }
  if (t.has_fragmentation) t.frag = FragmentationTable(*grid, set.daughter);

  t.alpha.resize(n);
  t.mu.resize(n);
  t.growth.resize(n);
  t.birth.resize(n);
  t.spacing.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid->pivot(i);
    t.alpha[i] = set.frag(x);
    t.mu[i] = set.death(x);
    t.growth[i] = set.growth(x);
    t.birth[i] = set.birth(x);
    t.spacing[i] = i + 1 < n ? grid->pivot(i + 1) - x : grid->width(i);
  }
  t.outflow_size = grid->pivot(n - 1) + grid->width(n - 1);
  return t;
}

ModelTables build_tables(std::shared_ptr<const SizeGrid> grid, const CoefficientSet& set,
                         unsigned threads) {
  auto alloc = std::make_shared<const PairAllocation>(*grid);
  return build_tables(std::move(grid), std::move(alloc), set, threads);
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t b = std::min(n, w * chunk);
    const std::size_t e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(0, std::min(n, chunk));
}

namespace {

void check_state(const StateVector& state, const ModelTables& tables, const RhsTerms& out) {
  if (!state.grid || !tables.grid || !state.grid->same_as(*tables.grid)) {
    throw DomainError("state grid does not match the operator tables");
  }
  if (state.xi.size() != tables.grid->size() || out.size() != tables.grid->size()) {
    throw DomainError(fmt::format("dimension mismatch: state {}, tables {}, terms {}",
                                  state.xi.size(), tables.grid->size(), out.size()));
  }
}

}  // namespace

void coagulation_rhs(const StateVector& state, const ModelTables& tables, RhsTerms& out) {
  check_state(state, tables, out);
  if (!tables.has_coagulation) return;
  const SizeGrid& grid = *tables.grid;
  const PairAllocation& alloc = *tables.alloc;
  const std::size_t n = grid.size();
  const auto& xi = state.xi;

  std::vector<double> number(n);
  for (std::size_t i = 0; i < n; ++i) number[i] = xi[i] * grid.width(i);

  std::vector<double> rate(alloc.pair_count());
  parallel_for(alloc.pair_count(), tables.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      const std::size_t i = alloc.first(p);
      const std::size_t j = alloc.second(p);
      const double r = tables.k(i, j) * number[i] * number[j];
      rate[p] = i == j ? 0.5 * r : r;
    }
  });

  parallel_for(n, tables.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double coll = 0.0;
      const double* row = tables.kernel.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) coll += row[j] * number[j];
      out.coag_loss[i] -= xi[i] * coll;
      out.loss_coefficient[i] += coll;

      double gain = 0.0;
      for (auto c = alloc.gather_begin(i); c != alloc.gather_end(i); ++c) {
        gain += c->weight * rate[c->pair];
      }
      out.coag_gain[i] += gain / grid.width(i);
    }
  });

  for (std::uint32_t p : alloc.overflow_pairs()) {
    const double v = grid.pivot(alloc.first(p)) + grid.pivot(alloc.second(p));
    out.coag_overflow_mass_rate += v * rate[p];
    out.coag_overflow_number_rate += rate[p];
  }
}

void fragmentation_rhs(const StateVector& state, const ModelTables& tables, RhsTerms& out) {
  check_state(state, tables, out);
  if (!tables.has_fragmentation) return;
  const SizeGrid& grid = *tables.grid;
  const std::size_t n = grid.size();
  const auto& xi = state.xi;

  std::vector<double> breakups(n);
  for (std::size_t j = 0; j < n; ++j) breakups[j] = tables.alpha[j] * xi[j] * grid.width(j);

  for (std::size_t i = 0; i < n; ++i) {
    double gain = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) gain += tables.frag.number(i, j) * breakups[j];
    const double self = tables.frag.self(i);
    double loss_factor = 1.0;
    if (self >= 0.0) {
      gain += self * breakups[i];
    } else {
      loss_factor -= self;
    }
    out.frag_gain[i] += gain / grid.width(i);
    out.frag_loss[i] -= loss_factor * tables.alpha[i] * xi[i];
    out.loss_coefficient[i] += loss_factor * tables.alpha[i];
  }
}

void growth_rhs(const StateVector& state, const ModelTables& tables, RhsTerms& out) {
  check_state(state, tables, out);
  const SizeGrid& grid = *tables.grid;
  const std::size_t n = grid.size();
  const auto& xi = state.xi;

  double inflow = 0.0;
  for (std::size_t j = 0; j < n; ++j) inflow += tables.birth[j] * xi[j] * grid.width(j);
  out.renewal_inflow[0] += inflow / grid.width(0);
  out.renewal_number_rate += inflow;
  out.renewal_mass_rate += grid.pivot(0) * inflow;

  // Upwind flux from pivot i to pivot i+1 (g >= 0).
  double flux_in = 0.0;
  double transport_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double number = xi[i] * grid.width(i);
    const double speed = tables.growth[i] / tables.spacing[i];
    const double flux_out = speed * number;
    out.growth_div[i] += (flux_in - flux_out) / grid.width(i);
    out.loss_coefficient[i] += speed;
    transport_mass += tables.growth[i] * number;
    flux_in = flux_out;
  }
  out.growth_overflow_number_rate += flux_in;
  out.growth_overflow_mass_rate += tables.outflow_size * flux_in;
  out.growth_mass_rate += transport_mass;
}

void death_rhs(const StateVector& state, const ModelTables& tables, RhsTerms& out) {
  check_state(state, tables, out);
  const SizeGrid& grid = *tables.grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = tables.mu[i] * state.xi[i];
    out.death[i] -= r;
    out.loss_coefficient[i] += tables.mu[i];
    out.death_number_rate += r * grid.width(i);
    out.death_mass_rate += grid.pivot(i) * r * grid.width(i);
  }
}

RhsTerms total_rhs(const StateVector& state, const ModelTables& tables) {
  RhsTerms out(tables.grid->size());
  coagulation_rhs(state, tables, out);
  fragmentation_rhs(state, tables, out);
  growth_rhs(state, tables, out);
  death_rhs(state, tables, out);
  return out;
}

CoefficientSet truncate_coefficients(const CoefficientSet& set, double level, bool growth_floor) {
  if (!(level > 0.0) || !std::isfinite(level)) {
    throw ParameterError(fmt::format("truncation level must be positive and finite, got {}", level));
  }
  CoefficientSet out = set;
  out.coag = set.coag.truncated(level);
  out.frag = set.frag.truncated(level);
  out.death = set.death.with_cutoff(level);
  if (growth_floor) out.growth = set.growth.with_offset(set.growth.offset() + 1.0 / level);
  return out;
}

}  // namespace gcf
