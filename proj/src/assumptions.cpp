#include "gcf/assumptions.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

namespace gcf {

namespace {

// Relative change the last probe decade may add to a sampled sup (inf) and still count as converged.
constexpr double kTailTol = 1e-2;

struct Extremum {
  double value;
  std::size_t i = 0;
  std::size_t j = 0;
};

// Sampled sup is "bounded" when the tail probes barely exceed the inner sup.
bool tail_bounded(double sup_full, double sup_inner) {
  if (!std::isfinite(sup_full)) return false;
  return sup_full <= sup_inner * (1.0 + kTailTol) || sup_full == 0.0;
}

bool tail_bounded_below(double inf_full, double inf_inner) {
  return inf_full > 0.0 && inf_full >= inf_inner * (1.0 - kTailTol);
}

class ProbeGrid {
 public:
  ProbeGrid(const CoagulationKernel& kernel, std::vector<double> pts)
      : pts_(std::move(pts)), n_(pts_.size()), k_(n_ * n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) k_[i * n_ + j] = kernel.evaluate(pts_[i], pts_[j]);
    }
  }
  std::size_t size() const { return n_; }
  double u(std::size_t i) const { return pts_[i]; }
  double k(std::size_t i, std::size_t j) const { return k_[i * n_ + j]; }

 private:
  std::vector<double> pts_;
  std::size_t n_;
  std::vector<double> k_;
};

template <class Pred, class Ratio>
Extremum pair_sup(const ProbeGrid& g, Pred&& include, Ratio&& ratio) {
  Extremum e{-kInf};
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!include(g.u(i), g.u(j))) continue;
      const double r = ratio(i, j);
      if (r > e.value) e = {r, i, j};
    }
  }
  return e;
}

template <class Pred, class Ratio>
Extremum pair_inf(const ProbeGrid& g, Pred&& include, Ratio&& ratio) {
  Extremum e{kInf};
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!include(g.u(i), g.u(j))) continue;
      const double r = ratio(i, j);
      if (r < e.value) e = {r, i, j};
    }
  }
  return e;
}

WorstPoint worst_at(const ProbeGrid& g, const Extremum& e) {
  return {g.u(e.i), g.u(e.j), e.value};
}

// c = sup f(u) / (1 + u) on {0} ∪ probes, the minimal constant with f <= c (1 + u).
HypothesisEntry linear_bound(const std::string& id, const std::string& p_name,
                             const std::string& q_name, const std::vector<double>& pts,
                             double inner_hi, const auto& f) {
  HypothesisEntry e;
  e.id = id;
  double sup_full = f(0.0);
  double sup_inner = sup_full;
  double arg = 0.0;
  double min_value = sup_full;
  for (double u : pts) {
    const double v = f(u);
    min_value = std::min(min_value, v);
    const double r = v / (1.0 + u);
    if (r > sup_full) {
      sup_full = r;
      arg = u;
    }
    if (u <= inner_hi) sup_inner = std::max(sup_inner, r);
  }
  e.constants = {{p_name, sup_full}, {q_name, sup_full}};
  e.satisfied = min_value >= 0.0 && tail_bounded(sup_full, sup_inner);
  if (!e.satisfied) e.worst = WorstPoint{arg, 0.0, sup_full};
  if (min_value < 0.0) e.note = "negative value on probes";
  return e;
}

}  // namespace

std::vector<double> ProbeSpec::points() const {
  if (!(u_lo > 0.0) || !(u_hi > u_lo) || per_decade < 1) {
    throw ParameterError(
        fmt::format("probe spec needs 0 < u_lo < u_hi and per_decade >= 1 (got {}, {}, {})", u_lo,
                    u_hi, per_decade));
  }
  const double decades = std::log10(u_hi / u_lo);
  const int count = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
  std::vector<double> pts(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    pts[static_cast<std::size_t>(k)] = u_lo * std::pow(u_hi / u_lo, double(k) / (count - 1));
  }
  pts.back() = u_hi;
  return pts;
}

double HypothesisEntry::constant(const std::string& name) const {
  for (const auto& [k, v] : constants) {
    if (k == name) return v;
  }
  throw std::out_of_range(fmt::format("hypothesis {} has no constant '{}'", id, name));
}

const HypothesisEntry& AssumptionReport::at(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return e;
  }
  throw std::out_of_range(fmt::format("no hypothesis entry '{}'", id));
}

double death_dominance_margin(const CoefficientSet& set, double u) {
  return set.growth(u) - u * set.death(u);
}

AssumptionReport verify_assumptions(const CoefficientSet& set, const ProbeSpec& probes) {
  const std::vector<double> pts = probes.points();
  const double inner_hi = probes.u_hi / 10.0;
  const double inner_lo = probes.u_lo * 10.0;
  const ProbeGrid grid(set.coag, pts);
  AssumptionReport report;

  // (2.1) symmetric, nonnegative, Υ <= Υ0 (1+u)(1+u1)
  {
    HypothesisEntry e;
    e.id = "2.1";
    auto all = [](double, double) { return true; };
    auto inner = [&](double u, double u1) { return u <= inner_hi && u1 <= inner_hi; };
    auto ratio = [&](std::size_t i, std::size_t j) {
      return grid.k(i, j) / ((1.0 + grid.u(i)) * (1.0 + grid.u(j)));
    };
    const Extremum full = pair_sup(grid, all, ratio);
    const Extremum in = pair_sup(grid, inner, ratio);
    bool symmetric = true;
    bool nonneg = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < grid.size(); ++j) {
        symmetric = symmetric && grid.k(i, j) == grid.k(j, i);
        nonneg = nonneg && grid.k(i, j) >= 0.0;
      }
    }
    e.constants = {{"upsilon0", full.value}};
    e.satisfied = symmetric && nonneg && tail_bounded(full.value, in.value);
    if (!symmetric) e.note = "kernel not symmetric on probes";
    if (!nonneg) e.note = "kernel negative on probes";
    if (!e.satisfied) e.worst = worst_at(grid, full);
    report.entries.push_back(std::move(e));
  }

  // (2.2) Υ <= Υ1 (u + u1) on (1, ∞)²
  {
    HypothesisEntry e;
    e.id = "2.2";
    auto above_one = [](double u, double u1) { return u > 1.0 && u1 > 1.0; };
    auto inner = [&](double u, double u1) { return above_one(u, u1) && u <= inner_hi && u1 <= inner_hi; };
    auto ratio = [&](std::size_t i, std::size_t j) {
      return grid.k(i, j) / (grid.u(i) + grid.u(j));
    };
    const Extremum full = pair_sup(grid, above_one, ratio);
    if (!std::isfinite(full.value)) {
      e.note = "no probes in (1, inf)^2";
      e.constants = {{"upsilon1", kInf}};
    } else {
      const Extremum in = pair_sup(grid, inner, ratio);
      e.constants = {{"upsilon1", full.value}};
      e.satisfied = std::isfinite(in.value) ? tail_bounded(full.value, in.value) : true;
      if (!e.satisfied) e.worst = worst_at(grid, full);
    }
    report.entries.push_back(std::move(e));
  }

  // (2.3)-(2.4) Υ <= r(u) r(u1), r(u) = sqrt(sup over the probe column)
  {
    HypothesisEntry e;
    e.id = "2.3-2.4";
    std::vector<double> r(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double col = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) col = std::max(col, grid.k(i, j));
      r[i] = std::sqrt(col);
    }
    double sup_full = 0.0;
    double sup_inner = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = r[i] / (1.0 + grid.u(i));
      sup_full = std::max(sup_full, v);
      if (grid.u(i) <= inner_hi) sup_inner = std::max(sup_inner, v);
    }
    bool decreasing = true;
    std::optional<WorstPoint> bad;
    std::size_t first_tail = grid.size() - 1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid.u(i) >= inner_hi) {
        first_tail = i;
        break;
      }
    }
    for (std::size_t i = first_tail + 1; i < grid.size(); ++i) {
      const double prev = r[i - 1] / grid.u(i - 1);
      const double cur = r[i] / grid.u(i);
      if (cur > prev) {
        decreasing = false;
        bad = WorstPoint{grid.u(i), 0.0, cur};
        break;
      }
    }
    const double tail_first = r[first_tail] / grid.u(first_tail);
    const double tail_last = r.back() / grid.u(grid.size() - 1);
    const bool vanishing = r.back() == 0.0 || tail_last < tail_first;
    e.constants = {{"sup_r_over_1pu", sup_full}, {"r_over_u_tail", tail_last}};
    e.satisfied = tail_bounded(sup_full, sup_inner) && decreasing && vanishing;
    if (!e.satisfied) e.worst = bad.value_or(WorstPoint{grid.u(grid.size() - 1), 0.0, tail_last});
    e.note = "r(u) fitted as sqrt of the sampled column supremum";
    report.entries.push_back(std::move(e));
  }

  // (2.5)-(2.6) daughter distribution: finite daughter count, local mass conservation
  {
    boost::math::quadrature::tanh_sinh<double> quad;
    double worst_count = 0.0;
    double worst_mass = 0.0;
    WorstPoint count_at{};
    WorstPoint mass_at{};
    const double m = set.daughter.daughter_count();
    for (std::size_t i = 0; i < pts.size(); i += 4) {
      const double u1 = pts[i];
      const double count =
          quad.integrate([&](double u) { return set.daughter(u, u1); }, 0.0, u1);
      const double mass =
          quad.integrate([&](double u) { return u * set.daughter(u, u1); }, 0.0, u1);
      const double ce = std::abs(count - m) / m;
      const double me = std::abs(mass - u1) / u1;
      if (ce > worst_count) {
        worst_count = ce;
        count_at = {u1, 0.0, count};
      }
      if (me > worst_mass) {
        worst_mass = me;
        mass_at = {u1, 0.0, mass};
      }
    }
    HypothesisEntry e5;
    e5.id = "2.5";
    e5.constants = {{"M", m}, {"max_rel_quadrature_error", worst_count}};
    e5.satisfied = std::isfinite(m) && worst_count <= 1e-8;
    if (!e5.satisfied) e5.worst = count_at;
    report.entries.push_back(std::move(e5));

    HypothesisEntry e6;
    e6.id = "2.6";
    e6.constants = {{"max_rel_mass_error", worst_mass}};
    e6.satisfied = worst_mass <= 1e-8;
    if (!e6.satisfied) e6.worst = mass_at;
    report.entries.push_back(std::move(e6));
  }

  // (2.7) α <= Pα u + Qα
  report.entries.push_back(linear_bound("2.7", "P_alpha", "Q_alpha", pts, inner_hi,
                                        [&](double u) { return set.frag(u); }));

  // (2.9) μ <= Pμ u + Qμ, plus boundedness of μ
  {
    HypothesisEntry e = linear_bound("2.9", "P_mu", "Q_mu", pts, inner_hi,
                                     [&](double u) { return set.death(u); });
    double sup_full = set.death(0.0);
    double sup_inner = sup_full;
    for (double u : pts) {
      sup_full = std::max(sup_full, set.death(u));
      if (u <= inner_hi) sup_inner = std::max(sup_inner, set.death(u));
    }
    e.constants.emplace_back("mu_sup", sup_full);
    e.constants.emplace_back("mu_bounded", tail_bounded(sup_full, sup_inner) ? 1.0 : 0.0);
    report.entries.push_back(std::move(e));
  }

  // (2.10) g <= g1 u + g0, plus a sampled Lipschitz constant
  {
    HypothesisEntry e = linear_bound("2.10", "g1", "g0", pts, inner_hi,
                                     [&](double u) { return set.growth(u); });
    std::vector<double> nodes{0.0};
    nodes.insert(nodes.end(), pts.begin(), pts.end());
    double a_full = 0.0;
    double a_inner = 0.0;
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      const double slope = std::abs(set.growth(nodes[k]) - set.growth(nodes[k - 1])) /
                           (nodes[k] - nodes[k - 1]);
      a_full = std::max(a_full, slope);
      if (nodes[k - 1] >= inner_lo && nodes[k] <= inner_hi) a_inner = std::max(a_inner, slope);
    }
    e.constants.emplace_back("lipschitz_A", a_full);
    e.constants.emplace_back("lipschitz", tail_bounded(a_full, a_inner) ? 1.0 : 0.0);
    report.entries.push_back(std::move(e));
  }

  // (2.11) a <= a1 (1 + u)
  {
    HypothesisEntry e = linear_bound("2.11", "a1", "a1_dup", pts, inner_hi,
                                     [&](double u) { return set.birth(u); });
    e.constants.pop_back();
    report.entries.push_back(std::move(e));
  }

  // (2.18) death dominance g(u) <= u μ(u)
  {
    HypothesisEntry e;
    e.id = "2.18";
    double worst = -kInf;
    double arg = 0.0;
    for (double u : pts) {
      const double margin = death_dominance_margin(set, u);
      if (margin > worst) {
        worst = margin;
        arg = u;
      }
    }
    const double scale = 1e-12 * std::max(1.0, std::abs(set.growth(arg)));
    e.constants = {{"max_margin", worst}};
    e.satisfied = worst <= scale;
    if (!e.satisfied) e.worst = WorstPoint{arg, 0.0, worst};
    report.entries.push_back(std::move(e));
  }

  // (2.19) Υ >= δθ on (θ, ∞)²
  {
    HypothesisEntry e;
    e.id = "2.19";
    e.satisfied = true;
    for (double theta : probes.thetas) {
      auto above = [&](double u, double u1) { return u > theta && u1 > theta; };
      auto inner = [&](double u, double u1) { return above(u, u1) && u <= inner_hi && u1 <= inner_hi; };
      auto value = [&](std::size_t i, std::size_t j) { return grid.k(i, j); };
      const Extremum full = pair_inf(grid, above, value);
      const Extremum in = pair_inf(grid, inner, value);
      const double delta = std::isfinite(full.value) ? full.value : 0.0;
      e.constants.emplace_back(fmt::format("delta_theta_{}", theta), delta);
      const bool ok = std::isfinite(full.value) &&
                      (std::isfinite(in.value) ? tail_bounded_below(full.value, in.value)
                                               : full.value > 0.0);
      if (!ok && e.satisfied) {
        e.satisfied = false;
        e.worst = std::isfinite(full.value) ? worst_at(grid, full) : WorstPoint{theta, theta, 0.0};
      }
    }
    report.entries.push_back(std::move(e));
  }

  // (2.21) Υ >= Υ2 (u u1)^(λ/2), λ in (1, 2]
  {
    HypothesisEntry e;
    e.id = "2.21";
    auto inner = [&](double u, double u1) {
      return u >= inner_lo && u <= inner_hi && u1 >= inner_lo && u1 <= inner_hi;
    };
    auto all = [](double, double) { return true; };
    auto check = [&](double lambda) {
      auto ratio = [&](std::size_t i, std::size_t j) {
        return grid.k(i, j) / std::pow(grid.u(i) * grid.u(j), lambda / 2.0);
      };
      const Extremum full = pair_inf(grid, all, ratio);
      const Extremum in = pair_inf(grid, inner, ratio);
      return std::pair{full, tail_bounded_below(full.value, in.value)};
    };
    std::vector<double> candidates;
    if (probes.lambda) {
      if (!(*probes.lambda > 1.0 && *probes.lambda <= 2.0)) {
        throw ParameterError(fmt::format("lambda must lie in (1, 2], got {}", *probes.lambda));
      }
      candidates.push_back(*probes.lambda);
    } else {
      for (int k = 1; k <= 100; ++k) candidates.push_back(1.0 + 0.01 * k);
    }
    Extremum last{0.0};
    for (double lambda : candidates) {
      const auto [ext, ok] = check(lambda);
      last = ext;
      if (ok) {
        e.satisfied = true;
        e.constants = {{"lambda", lambda}, {"upsilon2", ext.value}};
        break;
      }
    }
    if (!e.satisfied) {
      e.constants = {{"lambda", candidates.back()}, {"upsilon2", 0.0}};
      e.worst = worst_at(grid, last);
    }
    report.entries.push_back(std::move(e));
  }

  return report;
}

nlohmann::json to_json(const AssumptionReport& report) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json j;
    j["id"] = e.id;
    j["satisfied"] = e.satisfied;
    nlohmann::json c = nlohmann::json::object();
    for (const auto& [k, v] : e.constants) {
      c[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(fmt::format("{}", v));
    }
    j["constants"] = c;
    if (e.worst) {
      j["worst"] = {{"u", e.worst->u}, {"u1", e.worst->u1}, {"value", e.worst->value}};
    } else {
      j["worst"] = nullptr;
    }
    if (!e.note.empty()) j["note"] = e.note;
    out.push_back(std::move(j));
  }
  return nlohmann::json{{"hypotheses", out}};
}

}  // namespace gcf
