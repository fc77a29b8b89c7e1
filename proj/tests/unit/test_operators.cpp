#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <random>

#include "gcf/moments.hpp"
#include "gcf/operators.hpp"

using namespace gcf;

namespace {

std::shared_ptr<const SizeGrid> make(double u_max, std::size_t n, GridScheme s, double rho = 1.1) {
  return std::make_shared<const SizeGrid>(GridSpec{u_max, n, s, rho});
}

StateVector random_state(const std::shared_ptr<const SizeGrid>& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<double> xi(g->size());
  for (auto& v : xi) v = ud(rng) < 0.2 ? 0.0 : ud(rng);
  return StateVector(g, 0.0, xi);
}

double sum_weighted(const std::vector<double>& v, const SizeGrid& g, double power) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += std::pow(g.pivot(i), power) * v[i] * g.width(i);
  return s;
}

std::vector<CoagulationKernel> table1_kernels() {
  return {CoagulationKernel(LinearShear{}),         CoagulationKernel(NonlinearShear{}),
          CoagulationKernel(Gravitational{}),       CoagulationKernel(ModifiedSmoluchowski{1.0}),
          CoagulationKernel(ActivatedSludge{2.0, 1.0}), CoagulationKernel(ProductKernel{0.5})};
}

}  // namespace

TEST_CASE("zero state gives zero rates") {
  auto g = make(10.0, 30, GridScheme::Geometric);
  CoefficientSet s;
  s.coag = CoagulationKernel(ConstantKernel{1.0});
  s.frag = FragmentationSpec(1.0, 1.0);
  s.growth = RateFunction(ConstantRate{1.0});
  s.death = RateFunction(ConstantRate{1.0});
  s.birth = RateFunction(ConstantRate{1.0});
  const auto tables = build_tables(g, s);
  const auto terms = total_rhs(StateVector(g, 0.0, std::vector<double>(g->size(), 0.0)), tables);
  for (double v : terms.total()) CHECK(v == 0.0);
  CHECK(terms.overflow_mass_rate() == 0.0);
  CHECK(terms.renewal_number_rate == 0.0);
}

TEST_CASE("single occupied cell under the constant kernel") {
  auto g = make(16.0, 16, GridScheme::Uniform);  // pivots k + 1/2
  CoefficientSet s;
  s.coag = CoagulationKernel(ConstantKernel{1.0});
  const auto tables = build_tables(g, s);
  std::vector<double> xi(16, 0.0);
  const std::size_t i = 3;
  xi[i] = 2.0;
  RhsTerms out(16);
  coagulation_rhs(StateVector(g, 0.0, xi), tables, out);
  CHECK(out.coag_loss[i] == doctest::Approx(-xi[i] * xi[i] * g->width(i)));
  // Aggregate at 2 x_3 = 7 lies halfway between pivots 6.5 and 7.5.
  const double pair_rate = 0.5 * xi[i] * xi[i];
  CHECK(out.coag_gain[6] == doctest::Approx(0.5 * pair_rate));
  CHECK(out.coag_gain[7] == doctest::Approx(0.5 * pair_rate));
  double total_gain = 0.0;
  for (double v : out.coag_gain) total_gain += v;
  CHECK(total_gain == doctest::Approx(pair_rate));
}

TEST_CASE("two-cell constant kernel number rate matches brute-force pair sum") {
  auto g = make(3.0, 2, GridScheme::Geometric, 2.0);  // widths 1, 2
  CoefficientSet s;
  s.coag = CoagulationKernel(ConstantKernel{1.0});
  const auto tables = build_tables(g, s);
  const std::vector<double> xi = {1.0, 1.0};
  RhsTerms out(2);
  coagulation_rhs(StateVector(g, 0.0, xi), tables, out);
  double expected = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) expected -= 0.5 * xi[i] * xi[j] * g->width(i) * g->width(j);
  }
  // Merged pairs that leave the grid still count as one particle each.
  CHECK(sum_weighted(out.coag_gain, *g, 0.0) + sum_weighted(out.coag_loss, *g, 0.0) +
            out.coag_overflow_number_rate ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("coagulation conserves mass and has the pair-sum number rate") {
  std::mt19937_64 rng(21);
  auto g = make(40.0, 60, GridScheme::Geometric, 1.08);
  for (const auto& k : table1_kernels()) {
    CoefficientSet s;
    s.coag = k;
    const auto tables = build_tables(g, s);
    for (int trial = 0; trial < 10; ++trial) {
      const StateVector st = random_state(g, rng);
      RhsTerms out(g->size());
      coagulation_rhs(st, tables, out);
      double scale = 0.0, brute = 0.0;
      for (std::size_t i = 0; i < g->size(); ++i) {
        scale += g->pivot(i) * std::abs(out.coag_loss[i]) * g->width(i);
        CHECK(out.coag_gain[i] >= 0.0);
        CHECK(out.coag_loss[i] <= 0.0);
        for (std::size_t j = 0; j < g->size(); ++j) {
          brute += 0.5 * k(g->pivot(i), g->pivot(j)) * st.xi[i] * st.xi[j] * g->width(i) * g->width(j);
        }
      }
      const double mass = sum_weighted(out.coag_gain, *g, 1.0) + sum_weighted(out.coag_loss, *g, 1.0) +
                          out.coag_overflow_mass_rate;
      CAPTURE(k.kind());
      CHECK(std::abs(mass) <= 1e-12 * scale);
      const double number = sum_weighted(out.coag_gain, *g, 0.0) +
                            sum_weighted(out.coag_loss, *g, 0.0) + out.coag_overflow_number_rate;
      CHECK(number == doctest::Approx(-brute).epsilon(1e-12));
    }
  }
}

TEST_CASE("coagulation output does not depend on the worker count") {
  std::mt19937_64 rng(5);
  auto g = make(50.0, 150, GridScheme::Geometric, 1.04);
  CoefficientSet s;
  s.coag = CoagulationKernel(ProductKernel{0.5});
  const auto alloc = std::make_shared<const PairAllocation>(*g);
  const StateVector st = random_state(g, rng);
  RhsTerms one(g->size());
  coagulation_rhs(st, build_tables(g, alloc, s, 1), one);
  for (unsigned threads : {2u, 3u, 4u, 7u}) {
    RhsTerms many(g->size());
    coagulation_rhs(st, build_tables(g, alloc, s, threads), many);
    CHECK(many.coag_gain == one.coag_gain);
    CHECK(many.coag_loss == one.coag_loss);
    CHECK(many.coag_overflow_mass_rate == one.coag_overflow_mass_rate);
  }
}

TEST_CASE("parallel_for visits every index once") {
  for (std::size_t n : {0u, 1u, 5u, 1000u}) {
    for (unsigned threads : {1u, 3u, 8u}) {
      std::vector<std::atomic<int>> hits(n);
      parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) hits[i]++;
      });
      for (auto& h : hits) CHECK(h.load() == 1);
    }
  }
}

TEST_CASE("fragmentation column sums and mass neutrality") {
  auto g = make(20.0, 80, GridScheme::Geometric, 1.07);
  for (double nu : {0.0, -0.5}) {
    const DaughterSpec d(nu);
    const FragmentationTable table(*g, d);
    for (std::size_t j = 0; j < g->size(); ++j) {
      double count = 0.0, mass = 0.0;
      for (std::size_t i = 0; i <= j; ++i) {
        count += table.number(i, j);
        mass += g->pivot(i) * (i == j ? table.self(j) : table.number(i, j));
      }
      CHECK(count == doctest::Approx(d.daughter_count()).epsilon(1e-12));
      CHECK(mass == doctest::Approx(g->pivot(j)).epsilon(1e-12));
    }
  }
  // beta = 2/u1: the cell below x_j gets 2 (e_{i+1} - e_i)/x_j
  const DaughterSpec flat(0.0);
  const FragmentationTable t(*g, flat);
  CHECK(t.number(3, 10) == doctest::Approx(2.0 * g->width(3) / g->pivot(10)).epsilon(1e-13));
  CHECK(t.number(10, 10) ==
        doctest::Approx(2.0 * (g->pivot(10) - g->edge(10)) / g->pivot(10)).epsilon(1e-13));

  std::mt19937_64 rng(9);
  for (double nu : {0.0, -0.5}) {
    CoefficientSet s;
    s.frag = FragmentationSpec(1.5, 0.7);
    s.daughter = DaughterSpec(nu);
    const auto tables = build_tables(g, s);
    for (int trial = 0; trial < 20; ++trial) {
      const StateVector st = random_state(g, rng);
      RhsTerms out(g->size());
      fragmentation_rhs(st, tables, out);
      const double loss = -sum_weighted(out.frag_loss, *g, 1.0);
      const double mass = sum_weighted(out.frag_gain, *g, 1.0) - loss;
      CHECK(std::abs(mass) <= 1e-12 * loss);
      for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(out.frag_gain[i] >= 0.0);
        CHECK(out.frag_loss[i] <= 0.0);
      }
    }
  }
}

TEST_CASE("constant fragmentation rate: number grows at (n - 1) alpha M0") {
  // xi = e^{-u} on [0, 20]: the continuum rate is (n - 1) l0 (1 - e^{-20}).
  auto g = make(20.0, 400, GridScheme::Geometric, 1.02);
  std::vector<double> xi(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) {
    xi[i] = (std::exp(-g->edge(i)) - std::exp(-g->edge(i + 1))) / g->width(i);
  }
  CoefficientSet s;
  s.frag = FragmentationSpec(0.8, 0.0);
  s.daughter = DaughterSpec(-0.5);
  const auto tables = build_tables(g, s);
  RhsTerms out(g->size());
  fragmentation_rhs(StateVector(g, 0.0, xi), tables, out);
  const double rate = sum_weighted(out.frag_gain, *g, 0.0) + sum_weighted(out.frag_loss, *g, 0.0);
  const double oracle = (3.0 - 1.0) * 0.8 * -std::expm1(-20.0);
  CHECK(rate == doctest::Approx(oracle).epsilon(1e-2));
}

TEST_CASE("renewal inflow and its mass artifact") {
  auto g = make(10.0, 40, GridScheme::Geometric);
  CoefficientSet s;
  s.birth = RateFunction(ConstantRate{1.0});
  const auto tables = build_tables(g, s);
  std::vector<double> xi(g->size(), 0.0);
  xi[5] = 1.0 / g->width(5);
  xi[20] = 1.0 / g->width(20);  // M0 = 2
  RhsTerms out(g->size());
  growth_rhs(StateVector(g, 0.0, xi), tables, out);
  CHECK(out.renewal_number_rate == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(out.renewal_inflow[0] * g->width(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(out.renewal_mass_rate == g->pivot(0) * out.renewal_number_rate);
  for (std::size_t i = 1; i < g->size(); ++i) CHECK(out.renewal_inflow[i] == 0.0);
}

TEST_CASE("unit growth moves mass at rate M0 for interior data") {
  auto g = make(1.0, 200, GridScheme::Uniform);
  CoefficientSet s;
  s.growth = RateFunction(ConstantRate{1.0});
  const auto tables = build_tables(g, s);
  std::vector<double> xi(g->size(), 0.0);
  for (std::size_t i = 50; i < 150; ++i) xi[i] = std::sin(M_PI * (g->pivot(i) - 0.25) * 2.0);
  const StateVector st(g, 0.0, xi);
  RhsTerms out(g->size());
  growth_rhs(st, tables, out);
  const double dm1 = sum_weighted(out.growth_div, *g, 1.0);
  CHECK(dm1 == doctest::Approx(moment(st, 0.0)).epsilon(1e-12));
  CHECK(out.growth_mass_rate == doctest::Approx(moment(st, 0.0)).epsilon(1e-12));
  CHECK(std::abs(sum_weighted(out.growth_div, *g, 0.0)) <= 1e-12 * moment(st, 0.0));
  CHECK(out.growth_overflow_number_rate == 0.0);
}

TEST_CASE("growth outflow leaves with its ledger mass") {
  auto g = make(5.0, 50, GridScheme::Geometric, 1.05);
  CoefficientSet s;
  s.growth = RateFunction(AffineRate{0.3, 0.2});
  const auto tables = build_tables(g, s);
  std::mt19937_64 rng(2);
  const StateVector st = random_state(g, rng);
  RhsTerms out(g->size());
  growth_rhs(st, tables, out);
  const double dm0 = sum_weighted(out.growth_div, *g, 0.0);
  const double dm1 = sum_weighted(out.growth_div, *g, 1.0);
  CHECK(dm0 + out.growth_overflow_number_rate == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  CHECK(dm1 + out.growth_overflow_mass_rate ==
        doctest::Approx(out.growth_mass_rate).epsilon(1e-12));
  const std::size_t last = g->size() - 1;
  CHECK(out.growth_overflow_number_rate ==
        doctest::Approx(s.growth(g->pivot(last)) * st.xi[last] * g->width(last) / g->width(last)));
}

TEST_CASE("death terms") {
  auto g = make(10.0, 100, GridScheme::Geometric, 1.05);
  std::mt19937_64 rng(4);
  const StateVector st = random_state(g, rng);
  {
    CoefficientSet s;
    s.death = RateFunction(ConstantRate{0.7});
    RhsTerms out(g->size());
    death_rhs(st, build_tables(g, s), out);
    CHECK(sum_weighted(out.death, *g, 0.0) == doctest::Approx(-0.7 * moment(st, 0.0)).epsilon(1e-14));
    CHECK(out.death_number_rate == doctest::Approx(0.7 * moment(st, 0.0)).epsilon(1e-14));
  }
  {
    CoefficientSet s;
    s.death = RateFunction(AffineRate{1.0, 0.0});
    RhsTerms out(g->size());
    death_rhs(st, build_tables(g, s), out);
    CHECK(sum_weighted(out.death, *g, 1.0) == doctest::Approx(-moment(st, 2.0)).epsilon(1e-13));
    CHECK(out.death_mass_rate == doctest::Approx(moment(st, 2.0)).epsilon(1e-13));
  }
  CoefficientSet none;
  RhsTerms out(g->size());
  death_rhs(st, build_tables(g, none), out);
  for (double v : out.death) CHECK(v == 0.0);
}

TEST_CASE("truncated coefficients") {
  CoefficientSet s;
  s.death = RateFunction(AffineRate{1.0, 0.0});
  s.coag = CoagulationKernel(ProductKernel{0.5});
  s.frag = FragmentationSpec(1.0, 1.0);
  const CoefficientSet t = truncate_coefficients(s, 5.0);
  CHECK(t.death(7.0) == 0.0);
  CHECK(t.death(3.0) == 3.0);
  CHECK(t.growth(0.0) == doctest::Approx(0.2));
  CHECK(t.growth(123.0) == doctest::Approx(0.2));
  CHECK(t.coag(6.0, 2.0) == 0.0);
  CHECK(t.frag(6.0) == 0.0);
  CHECK(truncate_coefficients(s, 5.0, false).growth.is_zero());
  CHECK_THROWS_AS(truncate_coefficients(s, 0.0), ParameterError);
  CHECK_THROWS_AS(truncate_coefficients(s, -2.0), ParameterError);
}

TEST_CASE("truncation above the domain only adds the growth floor") {
  auto g = make(8.0, 60, GridScheme::Geometric, 1.05);
  CoefficientSet s;
  s.coag = CoagulationKernel(ProductKernel{0.5});
  s.frag = FragmentationSpec(1.0, 1.0);
  s.growth = RateFunction(AffineRate{0.1, 0.05});
  s.death = RateFunction(AffineRate{0.2, 0.1});
  s.birth = RateFunction(ConstantRate{0.3});
  const double level = 10.0;
  CoefficientSet floor_only;
  floor_only.growth = RateFunction(ConstantRate{1.0 / level});
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const StateVector st = random_state(g, rng);
    const auto full = total_rhs(st, build_tables(g, truncate_coefficients(s, level))).total();
    const auto base = total_rhs(st, build_tables(g, s)).total();
    RhsTerms extra(g->size());
    growth_rhs(st, build_tables(g, floor_only), extra);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double scale = std::abs(base[i]) + std::abs(extra.growth_div[i]) + 1e-300;
      CHECK(std::abs(full[i] - base[i] - extra.growth_div[i]) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("total rhs is the sum of the parts") {
  auto g = make(10.0, 30, GridScheme::Geometric, 1.1);
  std::mt19937_64 rng(13);
  const StateVector st = random_state(g, rng);
  CoefficientSet c;
  c.coag = CoagulationKernel(Gravitational{});
  RhsTerms coag(g->size());
  const auto tables = build_tables(g, c);
  coagulation_rhs(st, tables, coag);
  const auto total = total_rhs(st, tables);
  CHECK(total.total() == coag.total());
}

TEST_CASE("three-cell full model against hand assembly") {
  auto g = make(7.0, 3, GridScheme::Geometric, 2.0);  // edges 0, 1, 3, 7; pivots 0.5, 2, 5
  CoefficientSet s;
  s.coag = CoagulationKernel(ConstantKernel{0.6});
  s.frag = FragmentationSpec(0.5, 1.0);
  s.daughter = DaughterSpec(0.0);
  s.growth = RateFunction(ConstantRate{0.4});
  s.death = RateFunction(ConstantRate{0.3});
  s.birth = RateFunction(ConstantRate{0.2});
  const std::vector<double> x = {0.5, 2.0, 5.0}, w = {1.0, 2.0, 4.0}, e = {0.0, 1.0, 3.0, 7.0};
  const std::vector<double> xi = {0.9, 0.4, 0.1};
  std::vector<double> expected(3, 0.0);
  std::vector<double> N(3);
  for (int i = 0; i < 3; ++i) N[i] = xi[i] * w[i];

  // Coagulation: loss 0.6 xi_i M0; pairs (0,0) -> 1.0, (0,1) -> 2.5, (1,1) -> 4.0, rest overflow.
  const double m0 = N[0] + N[1] + N[2];
  for (int i = 0; i < 3; ++i) expected[i] -= 0.6 * xi[i] * m0;
  auto allocate = [&](double v, double rate) {
    // bracket v between consecutive pivots
    for (int k = 0; k < 2; ++k) {
      if (x[k] <= v && v < x[k + 1]) {
        const double hi = (v - x[k]) / (x[k + 1] - x[k]);
        expected[k] += (1.0 - hi) * rate / w[k];
        expected[k + 1] += hi * rate / w[k + 1];
      }
    }
  };
  allocate(1.0, 0.5 * 0.6 * N[0] * N[0]);
  allocate(2.5, 0.6 * N[0] * N[1]);
  allocate(4.0, 0.5 * 0.6 * N[1] * N[1]);

  // Fragmentation with alpha = 0.5 u and beta = 2/u1.
  for (int j = 0; j < 3; ++j) {
    const double breakups = 0.5 * x[j] * N[j];
    double mass = 0.0;
    std::vector<double> nij(3, 0.0);
    for (int i = 0; i <= j; ++i) {
      nij[i] = 2.0 * (std::min(e[i + 1], x[j]) - e[i]) / x[j];
      mass += x[i] * nij[i];
    }
    nij[j] += (x[j] - mass) / x[j];
    for (int i = 0; i <= j; ++i) expected[i] += nij[i] * breakups / w[i];
    expected[j] -= 0.5 * x[j] * xi[j];
  }

  // Growth: flux g N_i / (x_{i+1} - x_i), last cell over its own width.
  const std::vector<double> d = {1.5, 3.0, 4.0};
  double in = 0.2 * m0;
  for (int i = 0; i < 3; ++i) {
    const double out = 0.4 * N[i] / d[i];
    expected[i] += (in - out) / w[i];
    in = out;
  }
  for (int i = 0; i < 3; ++i) expected[i] -= 0.3 * xi[i];

  const auto got = total_rhs(StateVector(g, 0.0, xi), build_tables(g, s)).total();
  for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-13));
}

TEST_CASE("operators reject mismatched states") {
  auto g = make(10.0, 20, GridScheme::Uniform);
  auto h = make(10.0, 21, GridScheme::Uniform);
  CoefficientSet s;
  s.death = RateFunction(ConstantRate{1.0});
  const auto tables = build_tables(g, s);
  RhsTerms out(20);
  CHECK_THROWS_AS(death_rhs(StateVector(h, 0.0, std::vector<double>(21, 1.0)), tables, out),
                  DomainError);
  CHECK_THROWS_AS(StateVector(g, 0.0, std::vector<double>(20, -1.0)).validate(), DomainError);
  CHECK_THROWS_AS(StateVector(g, 0.0, std::vector<double>(19, 1.0)).validate(), DomainError);
}
