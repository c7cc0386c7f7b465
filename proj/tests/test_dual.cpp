#include "doctest.h"
#include "oracles.hpp"

using namespace rq;

namespace {

const std::vector<double> kHalf{0.5, 0.5};

CatalogSpec family(Family f, double alpha = 0.5) {
  CatalogSpec s;
  s.family = f;
  s.alpha = alpha;
  return s;
}

}  // namespace

TEST_CASE("CVaR envelope") {
  const auto env = envelope_extract(family(Family::quantile), FunctionalKind::risk, kHalf);
  const auto sup = envelope_support(env, {-1, 1});
  CHECK(sup.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sup.density[0] == doctest::Approx(0.0));
  CHECK(sup.density[1] == doctest::Approx(2.0));
  CHECK(envelope_contains(env, {1, 1}));
  CHECK(envelope_contains(env, {0.5, 1.5}));
  CHECK_FALSE(envelope_contains(env, {-0.5, 2.5}));
  CHECK_FALSE(envelope_contains(env, {1, 1.5}));
  CHECK(dual_axiom_check(env, FunctionalKind::risk).ok());
}

TEST_CASE("support function equals the primal for homogeneous risks") {
  std::mt19937_64 rng(41);
  const Family fams[] = {Family::quantile, Family::cvar2, Family::qsa, Family::mean_pl, Family::expectile_pl,
                         Family::standard_mean};
  for (Family f : fams) {
    CatalogSpec s = family(f, f == Family::qsa ? 0.4 : 0.7);
    if (f == Family::cvar2) continue;  // no finite description
    const auto q = make_catalog_quadrangle(s);
    CAPTURE(family_name(f));
    for (int i = 0; i < 20; ++i) {
      const auto x = oracle::sample(rng, 2 + i % 4);
      const auto env = envelope_extract(s, FunctionalKind::risk, x.probs());
      CHECK(envelope_support(env, x.values()).value == doctest::Approx(q.risk(x)).epsilon(1e-7));
    }
  }
  CHECK_THROWS_AS(envelope_extract(family(Family::cvar2), FunctionalKind::risk, kHalf), ValidationError);
}

TEST_CASE("envelope centers and hyperplanes") {
  std::mt19937_64 rng(42);
  for (auto kind : {FunctionalKind::risk, FunctionalKind::deviation, FunctionalKind::error, FunctionalKind::regret}) {
    const auto x = oracle::sample(rng, 4);
    const auto env = envelope_extract(family(Family::quantile, 0.6), kind, x.probs());
    CAPTURE(to_string(kind));
    CHECK(dual_axiom_check(env, kind).ok());
  }
  const auto sd = envelope_extract(family(Family::standard_mean), FunctionalKind::deviation, {0.2, 0.3, 0.5});
  CHECK(dual_axiom_check(sd, FunctionalKind::deviation).ok());
  CHECK(envelope_contains(sd, {0, 0, 0}));
}

TEST_CASE("the singleton envelope fails separation as a regret") {
  Envelope one;
  one.probs = {0.5, 0.5};
  one.a_eq = {{1, 0}, {0, 1}};
  one.b_eq = {1, 1};
  one.lower = {-kInf, -kInf};
  one.upper = {kInf, kInf};
  const auto r = dual_axiom_check(one, FunctionalKind::regret);
  CHECK(r.center);
  CHECK_FALSE(r.separation);
}

TEST_CASE("oracle envelopes from functionals") {
  const Functional mean = expectation;
  const auto env = envelope_from_functional(mean, kHalf);
  CHECK(envelope_contains(env, {1, 1}, 1e-6));
  CHECK_FALSE(envelope_contains(env, {0.5, 1.5}, 1e-6));
  const Functional square = [](const DiscreteRv& x) { return x.expect([](double t) { return t * t; }); };
  CHECK_THROWS_AS(envelope_from_functional(square, kHalf), ValidationError);
}

TEST_CASE("conjugates") {
  const Functional square = [](const DiscreteRv& x) { return x.expect([](double t) { return t * t; }); };
  const auto c = conjugate_eval(square, {1, 1}, kHalf);
  CHECK(c.value == doctest::Approx(0.25).epsilon(1e-8));
  CHECK_FALSE(c.unbounded);

  const Functional cv = [](const DiscreteRv& x) { return cvar_direct(x, 0.5); };
  CHECK(conjugate_eval(cv, {0.5, 1.5}, kHalf).value == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(conjugate_eval(cv, {-0.5, 2.5}, kHalf).unbounded);

  const Functional mean = expectation;
  CHECK(conjugate_eval(mean, {1, 1}, kHalf).value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(conjugate_eval(mean, {0.8, 1.2}, kHalf).unbounded);
}

TEST_CASE("biconjugate recovers the primal on two atoms") {
  // On E[Q] = 1 the conjugate of CVaR is 0 on a segment and +inf off it, so
  // f**(X) = max of the linear E[XQ] over the segment ends found by bisection.
  const Functional cv = [](const DiscreteRv& x) { return cvar_direct(x, 0.3); };
  std::mt19937_64 rng(43);
  for (int i = 0; i < 5; ++i) {
    const auto x = oracle::sample(rng, 2);
    const auto p = x.probs();
    auto feasible = [&](double w0) {
      return conjugate_eval(cv, {w0 / p[0], (1.0 - w0) / p[1]}, p, 20.0).value <= 1e-6 ? 1.0 : -1.0;
    };
    REQUIRE(feasible(p[0]) > 0);  // Q = 1
    const double hi = last_nonnegative(feasible, p[0], 1.0, 60);
    const double lo = -last_nonnegative([&](double t) { return feasible(-t); }, -p[0], 0.0, 60);
    auto value = [&](double w0) { return w0 * x.value(0) + (1.0 - w0) * x.value(1); };
    CHECK(std::max(value(lo), value(hi)) == doctest::Approx(cv(x)).epsilon(1e-6));
  }
}
