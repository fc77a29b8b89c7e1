#ifndef GCF_GRID_HPP_
#define GCF_GRID_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace gcf {

enum class GridScheme { Uniform, Geometric };

struct GridSpec {
  double u_max = 0.0;
  std::size_t cells = 0;
  GridScheme scheme = GridScheme::Geometric;
  /// Width ratio Δ_{i+1}/Δ_i for the geometric scheme.
  double ratio = 1.2599210498948732;  // 2^(1/3)
};

std::string to_string(GridScheme scheme);
GridScheme parse_scheme(const std::string& name);

/// Finite-volume partition of [0, u_max]. Cells are indexed 0..N-1;
/// cell i spans (edge(i), edge(i+1)] with pivot at its midpoint.
class SizeGrid {
 public:
  explicit SizeGrid(const GridSpec& spec);

  std::size_t size() const { return pivots_.size(); }
  double u_max() const { return edges_.back(); }
  GridScheme scheme() const { return spec_.scheme; }
  const GridSpec& spec() const { return spec_; }

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& pivots() const { return pivots_; }
  const std::vector<double>& widths() const { return widths_; }
  double edge(std::size_t i) const { return edges_[i]; }
  double pivot(std::size_t i) const { return pivots_[i]; }
  double width(std::size_t i) const { return widths_[i]; }

  /// Cell i with edge(i) < u <= edge(i+1). Throws DomainError outside (0, u_max].
  std::size_t locate(double u) const;

  bool same_as(const SizeGrid& other) const { return edges_ == other.edges_; }

 private:
  GridSpec spec_;
  std::vector<double> edges_;
  std::vector<double> pivots_;
  std::vector<double> widths_;
};

SizeGrid build_grid(const GridSpec& spec);

/// Fixed-pivot allocation of the aggregate x_i + x_j onto pivots k and k+1.
struct PairTarget {
  std::uint32_t lo = 0;
  double w_lo = 1.0;
  double w_hi = 0.0;
  bool overflow = false;
};

/// Allocation for unordered pairs i <= j, plus for every target cell the
/// list of (pair, weight) contributions in increasing pair order. Summing
/// gains through the gather lists gives a reduction order that does not
/// depend on how the pair loop is split across workers.
class PairAllocation {
 public:
  explicit PairAllocation(const SizeGrid& grid);

  std::size_t cells() const { return n_; }
  std::size_t pair_count() const { return targets_.size(); }

  /// Packed index of the unordered pair {i, j}.
  std::size_t pair_index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i - 1) / 2 + (j - i);
  }
  const PairTarget& at(std::size_t i, std::size_t j) const { return targets_[pair_index(i, j)]; }
  const PairTarget& target(std::size_t p) const { return targets_[p]; }

  /// First/second member of pair p.
  std::uint32_t first(std::size_t p) const { return first_[p]; }
  std::uint32_t second(std::size_t p) const { return second_[p]; }

  struct Contribution {
    std::uint32_t pair;
    double weight;
  };
  /// Contributions landing in cell k, CSR layout.
  const Contribution* gather_begin(std::size_t k) const { return gather_.data() + offsets_[k]; }
  const Contribution* gather_end(std::size_t k) const { return gather_.data() + offsets_[k + 1]; }

  /// Pairs whose aggregate exceeds the last pivot, in increasing order.
  const std::vector<std::uint32_t>& overflow_pairs() const { return overflow_; }

 private:
  std::size_t n_;
  std::vector<PairTarget> targets_;
  std::vector<std::uint32_t> first_;
  std::vector<std::uint32_t> second_;
  std::vector<std::size_t> offsets_;
  std::vector<Contribution> gather_;
  std::vector<std::uint32_t> overflow_;
};

PairAllocation build_pair_allocation(const SizeGrid& grid);

}  // namespace gcf

#endif  // GCF_GRID_HPP_
