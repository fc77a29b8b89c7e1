#ifndef GCF_OPERATORS_HPP_
#define GCF_OPERATORS_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "gcf/coefficients.hpp"
#include "gcf/grid.hpp"

namespace gcf {

/// Discrete number density: ξ_i is the average of ξ(t, ·) over cell i.
struct StateVector {
  std::shared_ptr<const SizeGrid> grid;
  double t = 0.0;
  std::vector<double> xi;
  /// Mass removed past u_max so far (coagulation overflow and growth outflow).
  double overflow_mass = 0.0;

  StateVector() = default;
  StateVector(std::shared_ptr<const SizeGrid> g, double time, std::vector<double> values);

  /// Throws DomainError on negative or non-finite entries or a size mismatch.
  void validate() const;
};

/// Per-cell rates of change of ξ split by mechanism, plus global flux rates.
struct RhsTerms {
  std::vector<double> coag_gain;
  std::vector<double> coag_loss;
  std::vector<double> frag_gain;
  std::vector<double> frag_loss;
  std::vector<double> growth_div;
  std::vector<double> death;
  std::vector<double> renewal_inflow;

  double coag_overflow_mass_rate = 0.0;
  double coag_overflow_number_rate = 0.0;
  double growth_overflow_mass_rate = 0.0;
  double growth_overflow_number_rate = 0.0;
  /// Number entering cell 0 through the renewal boundary, Σ a(x_j) ξ_j Δ_j.
  double renewal_number_rate = 0.0;
  /// x_0 times the renewal flux: mass the discrete inflow carries in.
  double renewal_mass_rate = 0.0;
  double death_number_rate = 0.0;
  double death_mass_rate = 0.0;
  /// Σ g(x_i) ξ_i Δ_i, the transport part of the mass balance.
  double growth_mass_rate = 0.0;

  /// Λ_i: total per-cell loss rate coefficient used by the time-step bound.
  std::vector<double> loss_coefficient;

  RhsTerms() = default;
  explicit RhsTerms(std::size_t n);

  std::size_t size() const { return coag_gain.size(); }
  double overflow_mass_rate() const { return coag_overflow_mass_rate + growth_overflow_mass_rate; }
  double overflow_number_rate() const {
    return coag_overflow_number_rate + growth_overflow_number_rate;
  }
  std::vector<double> total() const;
  double total(std::size_t i) const;
};

/// Breakup of a parent at pivot j into cells i <= j.
///
/// number(i, j) = ∫ β(u|x_j) du over cell i ∩ (0, x_j). The residual mass
/// x_j - Σ_i x_i number(i, j) is put back on the parent cell, so the own-cell
/// coefficient self(j) = number(j, j) + residual / x_j. A negative self(j)
/// becomes extra loss so that gains stay nonnegative.
class FragmentationTable {
 public:
  FragmentationTable() = default;
  FragmentationTable(const SizeGrid& grid, const DaughterSpec& daughter);

  double number(std::size_t i, std::size_t j) const { return number_[offset(j) + i]; }
  double self(std::size_t j) const { return self_[j]; }

 private:
  static std::size_t offset(std::size_t j) { return j * (j + 1) / 2; }
  std::vector<double> number_;
  std::vector<double> self_;
};

/// Everything the right-hand side needs that depends only on the grid and
/// the coefficients, sampled at pivots.
struct ModelTables {
  std::shared_ptr<const SizeGrid> grid;
  std::shared_ptr<const PairAllocation> alloc;
  CoefficientSet coefficients;
  /// K(x_i, x_j), row-major N×N, exactly symmetric.
  std::vector<double> kernel;
  FragmentationTable frag;
  std::vector<double> alpha;
  std::vector<double> mu;
  std::vector<double> growth;
  std::vector<double> birth;
  /// Pivot spacing for the transport flux: x_{i+1} - x_i, and Δ_{N-1} for the last cell.
  std::vector<double> spacing;
  /// Mass carried per particle by the growth outflow, x_{N-1} + Δ_{N-1}.
  double outflow_size = 0.0;
  bool has_coagulation = false;
  bool has_fragmentation = false;
  /// Worker count for the coagulation pair loop; results do not depend on it.
  unsigned threads = 1;

  double k(std::size_t i, std::size_t j) const { return kernel[i * grid->size() + j]; }
};

ModelTables build_tables(std::shared_ptr<const SizeGrid> grid,
                         std::shared_ptr<const PairAllocation> alloc, const CoefficientSet& set,
                         unsigned threads = 1);
ModelTables build_tables(std::shared_ptr<const SizeGrid> grid, const CoefficientSet& set,
                         unsigned threads = 1);

/// Runs body(begin, end) over [0, n) split into contiguous chunks.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

void coagulation_rhs(const StateVector& state, const ModelTables& tables, RhsTerms& out);
void fragmentation_rhs(const StateVector& state, const ModelTables& tables, RhsTerms& out);
void growth_rhs(const StateVector& state, const ModelTables& tables, RhsTerms& out);
void death_rhs(const StateVector& state, const ModelTables& tables, RhsTerms& out);

/// Sum of the four contributions, with the per-term breakdown kept.
RhsTerms total_rhs(const StateVector& state, const ModelTables& tables);

/// Cutoff family: μχ[0,n], αχ[0,n], Υχ[0,n]χ[0,n], g + 1/n (when growth_floor), a and β unchanged.
CoefficientSet truncate_coefficients(const CoefficientSet& set, double level,
                                     bool growth_floor = true);

}  // namespace gcf

#endif  // GCF_OPERATORS_HPP_
