#include "doctest.h"
#include "oracles.hpp"

using namespace rq;

namespace {

const DiscreteRv kSym({-1, 1}, {0.5, 0.5});
const DiscreteRv kSym2({-2, 2}, {0.5, 0.5});
const DiscreteRv kU5 = DiscreteRv::uniform({1, 2, 3, 4, 5});

CatalogSpec spec_of(Family f) {
  CatalogSpec s;
  s.family = f;
  s.alpha = 0.7;
  s.eps = 0.3;
  s.q = 0.7;
  s.k = 1.0;
  s.x = 0.3;
  if (f == Family::qsa) s.alpha = 0.4;
  return s;
}

// Midpoint rule on a fine grid: slow, but independent of the segment formulas.
double cvar_tail_integral(const DiscreteRv& x, double from) {
  const int n = 200000;
  const double h = (1.0 - from) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += oracle::cvar(x, from + (i + 0.5) * h);
  return s * h;
}

}  // namespace

TEST_CASE("family names round-trip") {
  for (Family f : all_families()) CHECK(parse_family(family_name(f)) == f);
  CHECK(all_families().size() == 9);
  CHECK_THROWS_AS(parse_family("nope"), ValidationError);
}

TEST_CASE("quantile family") {
  CatalogSpec s;
  s.alpha = 0.6;
  const auto q = make_catalog_quadrangle(s);
  CHECK(q.risk(kU5) == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(q.statistic(kU5) == StatInterval(3, 4));
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    const auto x = random_rv(rng);
    CHECK(q.risk(x) == doctest::Approx(oracle::cvar(x, 0.6)).epsilon(1e-10));
    const auto [lo, hi] = oracle::quantile(x, 0.6);
    CHECK(q.statistic(x) == StatInterval(lo, hi));
  }
}

TEST_CASE("standard deviation family") {
  CatalogSpec s;
  s.family = Family::standard_mean;
  const auto q = make_catalog_quadrangle(s);
  CHECK(q.risk(kSym) == doctest::Approx(1.0));
  CHECK(q.deviation(kSym) == doctest::Approx(1.0));
  CHECK(q.regret(kSym) == doctest::Approx(1.0));
  CHECK(q.error(kSym) == doctest::Approx(1.0));
  s.lambda = 0.0;
  CHECK_THROWS_AS(make_catalog_quadrangle(s), ValidationError);
}

TEST_CASE("mean absolute families") {
  CatalogSpec s;
  s.family = Family::mean_pl;
  const auto q = make_catalog_quadrangle(s);
  CHECK(q.deviation(kSym) == doctest::Approx(0.5));
  CHECK(q.error(kSym) == doctest::Approx(0.5));
  CatalogSpec b;
  b.family = Family::biased_mean;
  b.x = 0.0;
  const auto bq = make_catalog_quadrangle(b);
  std::mt19937_64 rng(22);
  for (int i = 0; i < 40; ++i) {
    const auto x = random_rv(rng);
    CHECK(bq.risk(x) == doctest::Approx(q.risk(x)).epsilon(1e-12));
    CHECK(bq.deviation(x) == doctest::Approx(q.deviation(x)).epsilon(1e-12));
    CHECK(bq.error(x) == doctest::Approx(q.error(x)).epsilon(1e-12));
    CHECK(bq.statistic(x).distance(q.statistic(x)) < 1e-9);
  }
}

TEST_CASE("biased mean error is a nonnegative error reproduced by projection") {
  CatalogSpec b;
  b.family = Family::biased_mean;
  b.x = 0.4;
  const auto q = make_catalog_quadrangle(b);
  CHECK(q.error(DiscreteRv::constant(0)) == 0.0);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 25; ++i) {
    const auto x = random_rv(rng);
    CHECK(q.error(x) >= 0.0);
    CHECK(project_error(q.error_fn(), x).value == doctest::Approx(q.deviation(x)).epsilon(1e-8));
  }
}

TEST_CASE("Vapnik family") {
  CatalogSpec s;
  s.family = Family::qsau;
  s.eps = 1.0;
  const auto q = make_catalog_quadrangle(s);
  CHECK(q.error(kSym2) == doctest::Approx(1.0));
  // every residual fits in the tube: zero deviation, any C within eps of both atoms
  s.eps = 2.5;
  const auto wide = make_catalog_quadrangle(s);
  CHECK(wide.deviation(kSym2) == 0.0);
  CHECK(wide.statistic(kSym2).distance(StatInterval(-0.5, 0.5)) < 1e-12);
}

TEST_CASE("tail CVaR family") {
  CatalogSpec s;
  s.family = Family::cvar2;
  s.alpha = 0.4;
  const auto q = make_catalog_quadrangle(s);
  CHECK(q.risk(DiscreteRv::constant(2.5)) == doctest::Approx(2.5).epsilon(1e-12));
  std::mt19937_64 rng(24);
  for (int i = 0; i < 4; ++i) {
    SamplerOptions so;
    so.uniform_probs = true;
    so.max_atoms = 5;
    const auto x = random_rv(rng, so);
    CHECK(cvar_integral(x, 0.4) == doctest::Approx(cvar_tail_integral(x, 0.4)).epsilon(1e-6));
  }
}

TEST_CASE("expectiles") {
  const DiscreteRv coin({0, 1}, {0.5, 0.5});
  CHECK(expectile_value(coin, 0.75) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(expectile_value(DiscreteRv::constant(-1.25), 0.3) == -1.25);
  std::mt19937_64 rng(25);
  for (int i = 0; i < 60; ++i) {
    const auto x = random_rv(rng);
    CHECK(expectile_value(x, 0.5) == doctest::Approx(oracle::mean(x)).epsilon(1e-12));
    const double q = 0.05 + 0.9 * (i % 10) / 9.0;
    CHECK(expectile_value(x, q) == doctest::Approx(oracle::expectile(x, q)).epsilon(1e-10));
  }
  CHECK(expectile_level_from_k(0.5) == doctest::Approx(0.75));
}

TEST_CASE("asymmetric square and piecewise expectile statistics coincide") {
  std::mt19937_64 rng(26);
  for (double k : {0.5, 1.0, 3.0}) {
    CatalogSpec pl, mse;
    pl.family = Family::expectile_pl, pl.k = k;
    mse.family = Family::expectile_mse, mse.q = expectile_level_from_k(k);
    const auto a = make_catalog_quadrangle(pl), b = make_catalog_quadrangle(mse);
    for (int i = 0; i < 20; ++i) {
      const auto x = random_rv(rng);
      const double c = a.statistic(x).mid();
      CHECK(c == doctest::Approx(b.statistic(x).mid()).epsilon(1e-7));
      // residual identity C - E[X] = E[(X - C)+] / K
      CHECK(c - expectation(x) == doctest::Approx(x.expect([c](double t) { return std::max(t - c, 0.0); }) / k).epsilon(1e-8));
    }
  }
}

TEST_CASE("Vapnik level sets and statistic union") {
  CHECK_THROWS_AS(alpha_set(kSym2, 2.0), ValidationError);
  const auto a = alpha_set(kSym2, 1.0);
  REQUIRE_FALSE(a.empty());
  const auto u = qsau_statistic_union(kSym2, 1.0);
  REQUIRE(u.size() == 1);
  CHECK(u.front().distance(StatInterval(-1, 1)) < 1e-12);
  const auto u5 = alpha_set(kU5, 0.0);
  CHECK(u5.front().lo() == 0.0);
}

TEST_CASE("every family keeps the quartet relations") {
  std::mt19937_64 rng(27);
  for (Family f : all_families()) {
    const auto q = make_catalog_quadrangle(spec_of(f));
    CAPTURE(family_name(f));
    for (int i = 0; i < 10; ++i) {
      const auto x = random_rv(rng, {6, -3, 3, 0.0, false});
      if (f == Family::qsau && !(0.3 < 0.5 * (x.max() - x.min()))) continue;
      const double m = expectation(x);
      CHECK(q.risk(x) - q.deviation(x) == doctest::Approx(m).epsilon(1e-9));
      if (std::isfinite(q.regret(x))) CHECK(q.regret(x) - q.error(x) == doctest::Approx(m).epsilon(1e-9));
      CHECK(q.risk(x) >= m - 1e-9);
      CHECK(regret_to_risk_value(q.regret, x) == doctest::Approx(q.risk(x)).epsilon(1e-6));
      CHECK(q.risk(DiscreteRv::constant(1.5)) == doctest::Approx(1.5).epsilon(1e-9));
    }
  }
}

TEST_CASE("symmetric average risk") {
  std::mt19937_64 rng(28);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_rv(rng);
    const double a = 0.2 + 0.05 * (i % 10);
    const double printed = 0.5 * ((1 + a) * oracle::cvar(x, (1 - a) / 2) + (1 - a) * oracle::cvar(x, (1 + a) / 2));
    CHECK(symmetric_cvar_risk(x, a) == doctest::Approx(printed).epsilon(1e-10));
  }
}
