#include "gcf/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

namespace gcf {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double moment(const StateVector& state, double gamma) {
  if (!(gamma >= 0.0)) throw DomainError(fmt::format("moment order must be >= 0, got {}", gamma));
  const SizeGrid& g = *state.grid;
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    s += power_law(g.pivot(i), gamma) * state.xi[i] * g.width(i);
  }
  return s;
}

double weighted_norm(const StateVector& state) { return moment(state, 0.0) + moment(state, 1.0); }

MomentRecord moment_record(const StateVector& state) {
  MomentRecord m;
  m.t = state.t;
  m.M0 = moment(state, 0.0);
  m.M1 = moment(state, 1.0);
  m.M2 = moment(state, 2.0);
  m.weighted_norm = m.M0 + m.M1;
  return m;
}

MassBalance mass_balance_residual(const Trajectory& traj, const CoefficientSet& set, double t1,
                                  double t2) {
  if (t2 < t1) throw std::out_of_range(fmt::format("t2 = {} precedes t1 = {}", t2, t1));
  const std::size_t a = traj.index_of(t1);
  const std::size_t b = traj.index_of(t2);
  const SizeGrid& grid = *traj.snapshots[a].grid;
  std::vector<double> source(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.pivot(i);
    source[i] = (set.growth(x) - x * set.death(x)) * grid.width(i);
  }
  auto rate = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) s += source[i] * traj.snapshots[k].xi[i];
    return s;
  };
  MassBalance mb;
  double prev = rate(a);
  for (std::size_t k = a + 1; k <= b; ++k) {
    const double cur = rate(k);
    mb.source_integral += 0.5 * (prev + cur) * (traj.snapshots[k].t - traj.snapshots[k - 1].t);
    prev = cur;
  }
  const Ledger& la = traj.ledgers[a];
  const Ledger& lb = traj.ledgers[b];
  mb.mass_change = traj.moments[b].M1 - traj.moments[a].M1;
  mb.overflow = lb.overflow_mass - la.overflow_mass;
  mb.renewal_artifact = lb.renewal_mass - la.renewal_mass;
  mb.clamp = lb.clamp_mass - la.clamp_mass;
  mb.residual = mb.mass_change - mb.source_integral + mb.overflow - mb.renewal_artifact - mb.clamp;
  const double ref = traj.moments[a].M1;
  mb.relative = ref > 0.0 ? std::abs(mb.residual) / ref : std::abs(mb.residual);
  return mb;
}

MassBalance ledger_mass_residual(const Trajectory& traj, std::size_t index) {
  const Ledger& l = traj.ledgers.at(index);
  const Ledger& l0 = traj.ledgers.front();
  MassBalance mb;
  mb.mass_change = traj.moments[index].M1 - traj.moments.front().M1;
  mb.source_integral = (l.growth_mass - l0.growth_mass) - (l.death_mass - l0.death_mass);
  mb.overflow = l.overflow_mass - l0.overflow_mass;
  mb.renewal_artifact = l.renewal_mass - l0.renewal_mass;
  mb.clamp = l.clamp_mass - l0.clamp_mass;
  mb.residual = mb.mass_change - mb.source_integral + mb.overflow - mb.renewal_artifact - mb.clamp;
  const double ref = traj.moments.front().M1;
  mb.relative = ref > 0.0 ? std::abs(mb.residual) / ref : std::abs(mb.residual);
  return mb;
}

TestFunction::TestFunction(Family family) : family_(std::move(family)) {
  std::visit(Overloaded{
                 [](const ExpDecayTest& f) {
                   if (!(f.k > 0.0)) {
                     throw ParameterError(fmt::format("exp-decay rate must be > 0, got {}", f.k));
                   }
                 },
                 [](const CappedLinearTest& f) {
                   if (!(f.cap > 0.0)) {
                     throw ParameterError(fmt::format("cap must be > 0, got {}", f.cap));
                   }
                 },
                 [](const SmoothBumpTest& f) {
                   if (!(f.half_width > 0.0) || !(f.center - f.half_width >= 0.0)) {
                     throw ParameterError(fmt::format(
                         "bump needs half_width > 0 and support in [0, inf), got center {} "
                         "half_width {}",
                         f.center, f.half_width));
                   }
                 },
             },
             family_);
}

double TestFunction::value(double u) const {
  return std::visit(Overloaded{
                        [&](const ExpDecayTest& f) { return std::exp(-f.k * u); },
                        [&](const CappedLinearTest& f) { return std::min(u, f.cap); },
                        [&](const SmoothBumpTest& f) {
                          const double s = (u - f.center) / f.half_width;
                          if (std::abs(s) >= 1.0) return 0.0;
                          return std::exp(1.0 - 1.0 / (1.0 - s * s));
                        },
                    },
                    family_);
}

double TestFunction::derivative(double u) const {
  return std::visit(Overloaded{
                        [&](const ExpDecayTest& f) { return -f.k * std::exp(-f.k * u); },
                        [&](const CappedLinearTest& f) { return u < f.cap ? 1.0 : 0.0; },
                        [&](const SmoothBumpTest& f) {
                          const double s = (u - f.center) / f.half_width;
                          if (std::abs(s) >= 1.0) return 0.0;
                          const double q = 1.0 - s * s;
                          const double v = std::exp(1.0 - 1.0 / q);
                          return v * (-2.0 * s / (q * q)) / f.half_width;
                        },
                    },
                    family_);
}

double TestFunction::psi(double u1, const DaughterSpec& daughter) const {
  if (!(u1 > 0.0)) throw DomainError(fmt::format("parent size must be > 0, got {}", u1));
  const double nu = daughter.nu();
  return std::visit(
      Overloaded{
          [&](const ExpDecayTest& f) {
            // ∫_0^{u1} e^{-ku} (ν+2) u^ν / u1^{ν+1} du = (ν+2) γ(ν+1, k u1) / (k u1)^{ν+1}
            const double z = f.k * u1;
            const double lower = boost::math::tgamma_lower(nu + 1.0, z);
            return (nu + 2.0) * lower / std::pow(z, nu + 1.0) - std::exp(-z);
          },
          [&](const CappedLinearTest& f) {
            if (u1 <= f.cap) return 0.0;
            return daughter.mass_between(0.0, f.cap, u1) +
                   f.cap * daughter.number_between(f.cap, u1, u1) - f.cap;
          },
          [&](const SmoothBumpTest& f) {
            const double lo = f.center - f.half_width;
            const double hi = std::min(u1, f.center + f.half_width);
            double integral = 0.0;
            if (hi > lo) {
              boost::math::quadrature::tanh_sinh<double> quad;
              integral = quad.integrate([&](double u) { return value(u) * daughter(u, u1); }, lo,
                                        hi, 1e-10);
            }
            return integral - value(u1);
          },
      },
      family_);
}

double TestFunction::tilde(double u, double u1) const {
  return value(u + u1) - value(u) - value(u1);
}

std::string TestFunction::regularity() const {
  return std::holds_alternative<CappedLinearTest>(family_) ? "Lipschitz" : "C1";
}

WeakFormResidual weak_form_residual(const Trajectory& traj, const CoefficientSet& set,
                                    const TestFunction& test, double t) {
  const std::size_t last = traj.index_of(t);
  const SizeGrid& grid = *traj.snapshots.front().grid;
  const std::size_t n = grid.size();

  std::vector<double> theta(n), transport(n), point(n), frag(n), kernel_tilde(n * n);
  const double theta0 = test.value(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.pivot(i);
    theta[i] = test.value(x);
    transport[i] = test.derivative(x) * set.growth(x);
    point[i] = theta0 * set.birth(x) - set.death(x) * theta[i];
    frag[i] = set.frag.is_zero() ? 0.0 : set.frag(x) * test.psi(x, set.daughter);
  }
  if (!set.coag.is_zero()) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double v =
            0.5 * test.tilde(grid.pivot(i), grid.pivot(j)) * set.coag.evaluate(grid.pivot(i), grid.pivot(j));
        kernel_tilde[i * n + j] = v;
        kernel_tilde[j * n + i] = v;
      }
    }
  }

  auto pairing = [&](const StateVector& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += theta[i] * s.xi[i] * grid.width(i);
    return acc;
  };
  auto integrand = [&](const StateVector& s) {
    std::vector<double> number(n);
    for (std::size_t i = 0; i < n; ++i) number[i] = s.xi[i] * grid.width(i);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (transport[i] + point[i] + frag[i]) * number[i];
    if (!set.coag.is_zero()) {
      for (std::size_t i = 0; i < n; ++i) {
        if (number[i] == 0.0) continue;
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += kernel_tilde[i * n + j] * number[j];
        acc += number[i] * row;
      }
    }
    return acc;
  };

  WeakFormResidual out;
  out.regularity = test.regularity();
  out.left = pairing(traj.snapshots[last]);
  out.right = pairing(traj.snapshots.front());
  double prev = integrand(traj.snapshots.front());
  for (std::size_t k = 1; k <= last; ++k) {
    const double cur = integrand(traj.snapshots[k]);
    out.right += 0.5 * (prev + cur) * (traj.snapshots[k].t - traj.snapshots[k - 1].t);
    prev = cur;
  }
  out.residual = std::abs(out.left - out.right);
  return out;
}

double weighted_difference_norm(const StateVector& a, const StateVector& b) {
  if (!a.grid || !b.grid || !a.grid->same_as(*b.grid) || a.xi.size() != b.xi.size()) {
    throw DomainError("weighted difference of states on different grids");
  }
  const SizeGrid& g = *a.grid;
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    s += (1.0 + g.pivot(i)) * std::abs(a.xi[i] - b.xi[i]) * g.width(i);
  }
  return s;
}

DecayFit decay_fit(const std::vector<MomentRecord>& moments, MomentKind which, double t_lo,
                   double t_hi) {
  std::vector<double> lx, ly;
  for (const auto& m : moments) {
    if (m.t < t_lo || m.t > t_hi) continue;
    const double v = which == MomentKind::M0 ? m.M0 : m.M1;
    if (!(v > 0.0) || !(m.t > 0.0)) {
      throw DomainError(fmt::format("decay fit needs positive values, got M = {} at t = {}", v, m.t));
    }
    lx.push_back(std::log(m.t));
    ly.push_back(std::log(v));
  }
  if (lx.size() < 5) {
    throw DomainError(
        fmt::format("decay fit needs at least 5 records in [{}, {}], got {}", t_lo, t_hi, lx.size()));
  }
  const double n = double(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("decay fit window has a single distinct time");
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.prefactor = std::exp(my - fit.slope * mx);
  fit.points = lx.size();
  return fit;
}

double exponential_envelope_rate(const AssumptionReport& report) {
  const double a = report.constant("2.11", "a1");
  const double g = report.constant("2.10", "g1");
  const double m = report.constant("2.5", "M");
  const double alpha = std::max(report.constant("2.7", "P_alpha"), report.constant("2.7", "Q_alpha"));
  return a + g + m * alpha + 1.0;
}

double second_moment_envelope(const AssumptionReport& report, double m2_initial,
                              double norm_initial, double horizon) {
  const double c3 = exponential_envelope_rate(report);
  const double g = report.constant("2.10", "g1");
  const double u0 = report.constant("2.1", "upsilon0");
  const double u1 = report.constant("2.2", "upsilon1");
  const double grow = norm_initial * std::exp(c3 * horizon);
  // j(u) = u²: j''(0)/2 = 1, j(1) = 1.
  const double base = m2_initial + u0 * horizon * grow * grow + (1.0 + g) * horizon * grow;
  const double rate = horizon * (3.0 * (1.0 + g) + 8.0 * u0 * grow + 2.0 * u1 * grow);
  return base * std::exp(rate);
}

}  // namespace gcf
