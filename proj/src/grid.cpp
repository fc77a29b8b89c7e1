#include "gcf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gcf/coefficients.hpp"

namespace gcf {

std::string to_string(GridScheme scheme) {
  return scheme == GridScheme::Uniform ? "uniform" : "geometric";
}

GridScheme parse_scheme(const std::string& name) {
  if (name == "uniform") return GridScheme::Uniform;
  if (name == "geometric") return GridScheme::Geometric;
  throw ParameterError(fmt::format("unknown grid scheme '{}' (expected uniform|geometric)", name));
}

SizeGrid::SizeGrid(const GridSpec& spec) : spec_(spec) {
  if (!(spec.u_max > 0.0) || !std::isfinite(spec.u_max)) {
    throw ParameterError(fmt::format("grid u_max must be positive and finite, got {}", spec.u_max));
  }
  if (spec.cells < 2) {
    throw ParameterError(fmt::format("grid needs at least 2 cells, got {}", spec.cells));
  }
  if (spec.cells > std::numeric_limits<std::uint32_t>::max() / 4) {
    throw ParameterError(fmt::format("grid cell count {} too large", spec.cells));
  }
  const std::size_t n = spec.cells;
  edges_.resize(n + 1);
  edges_[0] = 0.0;
  if (spec.scheme == GridScheme::Uniform) {
    for (std::size_t i = 1; i <= n; ++i) edges_[i] = spec.u_max * double(i) / double(n);
  } else {
    const double rho = spec.ratio;
    if (!(rho > 1.0) || !std::isfinite(rho)) {
      throw ParameterError(fmt::format("geometric grid ratio must exceed 1, got {}", rho));
    }
    const double delta0 = spec.u_max * (rho - 1.0) / std::expm1(double(n) * std::log(rho));
    if (!(delta0 > 0.0)) {
      throw ParameterError(
          fmt::format("geometric grid with ratio {} and {} cells underflows", rho, n));
    }
    double w = delta0;
    for (std::size_t i = 1; i <= n; ++i) {
      edges_[i] = edges_[i - 1] + w;
      w *= rho;
    }
  }
  edges_[n] = spec.u_max;
  pivots_.resize(n);
  widths_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    widths_[i] = edges_[i + 1] - edges_[i];
    pivots_[i] = 0.5 * (edges_[i] + edges_[i + 1]);
    if (!(widths_[i] > 0.0)) {
      throw ParameterError(fmt::format("grid cell {} has nonpositive width", i));
    }
  }
}

std::size_t SizeGrid::locate(double u) const {
  if (!(u > 0.0) || u > u_max()) {
    throw DomainError(fmt::format("size {} outside grid range (0, {}]", u, u_max()));
  }
  const auto it = std::lower_bound(edges_.begin() + 1, edges_.end(), u);
  return static_cast<std::size_t>(it - edges_.begin()) - 1;
}

SizeGrid build_grid(const GridSpec& spec) { return SizeGrid(spec); }

PairAllocation::PairAllocation(const SizeGrid& grid) : n_(grid.size()) {
  const auto& x = grid.pivots();
  const std::size_t pairs = n_ * (n_ + 1) / 2;
  targets_.resize(pairs);
  first_.resize(pairs);
  second_.resize(pairs);
  std::vector<std::size_t> counts(n_, 0);

  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      const std::size_t p = pair_index(i, j);
      first_[p] = static_cast<std::uint32_t>(i);
      second_[p] = static_cast<std::uint32_t>(j);
      const double v = x[i] + x[j];
      PairTarget& t = targets_[p];
      if (v > x.back()) {
        t.overflow = true;
        t.lo = static_cast<std::uint32_t>(n_ - 1);
        t.w_lo = 0.0;
        t.w_hi = 0.0;
        overflow_.push_back(static_cast<std::uint32_t>(p));
        continue;
      }
      const auto it = std::upper_bound(x.begin(), x.end(), v);
      const std::size_t k = static_cast<std::size_t>(it - x.begin()) - 1;
      t.lo = static_cast<std::uint32_t>(k);
      if (x[k] == v || k + 1 == n_) {
        t.w_lo = 1.0;
        t.w_hi = 0.0;
        ++counts[k];
      } else {
        t.w_hi = (v - x[k]) / (x[k + 1] - x[k]);
        t.w_lo = 1.0 - t.w_hi;
        ++counts[k];
        ++counts[k + 1];
      }
    }
  }

  offsets_.assign(n_ + 1, 0);
  for (std::size_t k = 0; k < n_; ++k) offsets_[k + 1] = offsets_[k] + counts[k];
  gather_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t p = 0; p < pairs; ++p) {
    const PairTarget& t = targets_[p];
    if (t.overflow) continue;
    gather_[fill[t.lo]++] = {static_cast<std::uint32_t>(p), t.w_lo};
    const double v = x[first_[p]] + x[second_[p]];
    if (!(x[t.lo] == v || t.lo + 1 == n_)) {
      gather_[fill[t.lo + 1]++] = {static_cast<std::uint32_t>(p), t.w_hi};
    }
  }
}

PairAllocation build_pair_allocation(const SizeGrid& grid) { return PairAllocation(grid); }

}  // namespace gcf
