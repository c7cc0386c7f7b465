#include "doctest.h"
#include "oracles.hpp"

using namespace rq;

namespace {

const DiscreteRv kSym({-1, 1}, {0.5, 0.5});
const DiscreteRv kSym2({-2, 2}, {0.5, 0.5});
const DiscreteRv kU5 = DiscreteRv::uniform({1, 2, 3, 4, 5});

ErrorFn l2_error(double lambda = 1.0) {
  Flags f;
  f.positively_homogeneous = true;
  return {[lambda](const DiscreteRv& x) { return lambda * p_norm(x, 2); }, f, "l2", std::nullopt};
}

ErrorFn loss_error(const ScalarLoss& l) {
  Flags f;
  f.expectation_type = true;
  return {[l](const DiscreteRv& x) { return l.expect(x); }, f, l.label, l};
}

// Exact min over C of E e(X - C) for piecewise-linear e: the minimum sits at an
// atom-translated kink.
double pwl_projection(const ScalarLoss& l, const DiscreteRv& x) {
  double best = kInf;
  for (const auto& a : x.atoms())
    for (double k : l.kinks) best = std::min(best, l.expect(x.shift(-(a.value - k))));
  return best;
}

}  // namespace

TEST_CASE("error projection") {
  const auto kb = loss_error(koenker_bassett_loss(0.5));
  const auto u3 = DiscreteRv::uniform({1, 2, 3});
  auto p = project_error(kb, u3);
  CHECK(p.statistic == StatInterval(2, 2));
  CHECK(p.value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  p = project_error(l2_error(), kSym);
  CHECK(p.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(p.statistic.distance(StatInterval(0, 0)) < 1e-7);

  p = project_error(kb, DiscreteRv::constant(4.5));
  CHECK(p.value == doctest::Approx(0.0));
  CHECK(p.statistic.distance(StatInterval(4.5, 4.5)) < 1e-7);
}

TEST_CASE("error projection agrees with breakpoint enumeration") {
  std::mt19937_64 rng(11);
  const ScalarLoss losses[] = {koenker_bassett_loss(0.3), vapnik_loss(0.5), two_piece_linear_loss(2.0, 0.5)};
  for (int i = 0; i < 40; ++i) {
    const auto x = random_rv(rng);
    for (const auto& l : losses) {
      if (l.label.find("apnik") != std::string::npos && !(0.5 < 0.5 * (x.max() - x.min()))) continue;
      const auto p = project_error(loss_error(l), x);
      CHECK(p.value == doctest::Approx(pwl_projection(l, x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("regret formula") {
  ScalarLoss tail;
  tail.e = [](double t) { return std::max(t, 0.0) / 0.25; };
  tail.d_left = [](double t) { return t > 0 ? 4.0 : 0.0; };
  tail.d_right = [](double t) { return t >= 0 ? 4.0 : 0.0; };
  tail.kinks = {0.0};
  RegretFn v{[tail](const DiscreteRv& x) { return tail.expect(x); }, {}, "tail", tail};
  CHECK(regret_to_risk(v, kSym).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(regret_to_risk(v, kSym).value == doctest::Approx(cvar_direct(kSym, 0.75)));

  RegretFn mean_l2{[](const DiscreteRv& x) { return expectation(x) + p_norm(x, 2); }, {}, "mean+l2", std::nullopt};
  CHECK(regret_to_risk(mean_l2, kSym).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(regret_to_risk(v, DiscreteRv::constant(-3.25)).value == doctest::Approx(-3.25).epsilon(1e-12));
  CHECK(regret_to_risk_value(v.eval, kU5) == doctest::Approx(cvar_direct(kU5, 0.75)).epsilon(1e-10));
}

TEST_CASE("regret and error convert into each other") {
  const auto v = regret_from_error(l2_error());
  CHECK(v(kSym) == doctest::Approx(1.0));
  CHECK(v(DiscreteRv::constant(0)) == 0.0);
  const auto vap = regret_from_error(loss_error(vapnik_loss(1.0)));
  CHECK(vap(kSym2) == doctest::Approx(1.0));
  const auto back = error_from_regret(vap);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 30; ++i) {
    const auto x = random_rv(rng);
    CHECK(back(x) == doctest::Approx(vapnik_loss(1.0).expect(x)).epsilon(1e-12));
  }
}

TEST_CASE("one-sided derivative statistic") {
  CHECK(expectation_statistic(koenker_bassett_loss(0.6), kU5) == quantile_interval(kU5, 0.6));
  CHECK(expectation_statistic(squared_loss(), kU5).distance(StatInterval(3, 3)) < 1e-12);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 50; ++i) {
    const auto x = random_rv(rng);
    const double q = 0.1 + 0.8 * (i % 9) / 8.0;
    const auto s = expectation_statistic(asymmetric_square_loss(q), x);
    CHECK(s.mid() == doctest::Approx(oracle::expectile(x, q)).epsilon(1e-9));
  }
}

TEST_CASE("quadrangle generated by an error") {
  auto sd = quadrangle_from_error(l2_error(2.0));
  std::mt19937_64 rng(14);
  for (int i = 0; i < 25; ++i) {
    const auto x = random_rv(rng);
    const double s = std::sqrt(oracle::variance(x));
    CHECK(sd.deviation(x) == doctest::Approx(2 * s).epsilon(1e-8));
    CHECK(sd.risk(x) == doctest::Approx(oracle::mean(x) + 2 * s).epsilon(1e-8));
    CHECK(sd.risk(x) - sd.deviation(x) == doctest::Approx(expectation(x)).epsilon(1e-9));
    CHECK(sd.regret(x) - sd.error(x) == doctest::Approx(expectation(x)).epsilon(1e-9));
  }

  auto vq = quadrangle_from_error(loss_error(vapnik_loss(1.0)));
  CHECK(vq.error(kSym2) == doctest::Approx(1.0));
  CHECK(vq.statistic(kSym2).distance(StatInterval(-1, 1)) < 1e-7);

  auto am = quadrangle_from_error(loss_error(asymmetric_square_loss(0.75)));
  const DiscreteRv coin({0, 1}, {0.5, 0.5});
  CHECK(am.statistic(coin).mid() == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("errors failing the axioms are rejected") {
  ErrorFn negative{[](const DiscreteRv& x) { return expectation(x); }, {}, "mean", std::nullopt};
  CHECK_FALSE(check_error_axioms(negative.eval).ok);
  CHECK_THROWS_AS(quadrangle_from_error(negative), ValidationError);
  ErrorFn zero{[](const DiscreteRv&) { return 0.0; }, {}, "zero", std::nullopt};
  CHECK_FALSE(check_error_axioms(zero.eval).ok);
  CHECK(check_error_axioms(l2_error().eval).ok);
  CHECK(sampled_monotone_error(loss_error(koenker_bassett_loss(0.4)).eval));
  CHECK_FALSE(sampled_monotone_error(l2_error().eval));
}

TEST_CASE("expectation quadrangle from a scalar loss") {
  const auto sq = expectation_quadrangle(squared_loss());
  CHECK(sq.statistic(kU5).distance(StatInterval(3, 3)) < 1e-9);
  CHECK(sq.deviation(kU5) == doctest::Approx(2.0).epsilon(1e-10));
  const auto kb = expectation_quadrangle(koenker_bassett_loss(0.6));
  CHECK(kb.statistic(kU5) == StatInterval(3, 4));
  CHECK(kb.risk(kU5) == doctest::Approx(4.5).epsilon(1e-10));
  CHECK(kb.flags.expectation_type);

  ScalarLoss concave;
  concave.e = [](double t) { return std::sqrt(std::abs(t)); };
  concave.d_left = [](double t) { return t > 0 ? 0.5 / std::sqrt(t) : -0.5 / std::sqrt(-t); };
  concave.d_right = concave.d_left;
  concave.label = "sqrt";
  CHECK_THROWS_AS(expectation_quadrangle(concave), ValidationError);
}

TEST_CASE("mixtures") {
  CatalogSpec lo, hi;
  lo.alpha = 0.25;
  hi.alpha = 0.75;
  const auto q1 = make_catalog_quadrangle(lo), q2 = make_catalog_quadrangle(hi);
  const auto m = mix_quadrangles({q1, q2}, {0.5, 0.5});
  CHECK(m.risk(kU5) == doctest::Approx(0.5 * cvar_direct(kU5, 0.25) + 0.5 * cvar_direct(kU5, 0.75)).epsilon(1e-10));
  const auto expected = quantile_interval(kU5, 0.25) * 0.5 + quantile_interval(kU5, 0.75) * 0.5;
  CHECK(m.statistic(kU5).distance(expected) < 1e-9);

  const auto one = mix_quadrangles({q1}, {1.0});
  std::mt19937_64 rng(15);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_rv(rng);
    CHECK(one.risk(x) == doctest::Approx(q1.risk(x)).epsilon(1e-12));
    CHECK(one.error(x) == doctest::Approx(q1.error(x)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(mix_quadrangles({q1, q2}, {0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(mix_quadrangles({q1, q2}, {1.5, -0.5}), ValidationError);
}

TEST_CASE("scaling") {
  CatalogSpec sm;
  sm.family = Family::standard_mean;
  const auto q = make_catalog_quadrangle(sm);
  const auto same = scale_quadrangle(q, 1.0, ScaleMode::affine);
  const auto twice = scale_quadrangle(q, 2.0, ScaleMode::affine);
  const auto persp = scale_quadrangle(q, 2.0, ScaleMode::perspective);
  std::mt19937_64 rng(16);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_rv(rng);
    const double s = std::sqrt(oracle::variance(x));
    CHECK(same.deviation(x) == doctest::Approx(q.deviation(x)).epsilon(1e-12));
    CHECK(twice.deviation(x) == doctest::Approx(2 * s).epsilon(1e-9));
    CHECK(persp.risk(x) == doctest::Approx(q.risk(x)).epsilon(1e-9));
    CHECK(persp.error(x) == doctest::Approx(q.error(x)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(scale_quadrangle(q, 0.0, ScaleMode::affine), ValidationError);
}

TEST_CASE("reverting") {
  CatalogSpec half;
  half.alpha = 0.5;
  const auto q = make_catalog_quadrangle(half);
  const auto r = revert_quadrangles(q, q);
  CHECK(r.deviation(kSym) == doctest::Approx(1.0).epsilon(1e-10));

  CatalogSpec sm;
  sm.family = Family::standard_mean;
  sm.lambda = 1.5;
  const auto s = make_catalog_quadrangle(sm);
  const auto rs = revert_quadrangles(s, s);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 15; ++i) {
    const auto x = random_rv(rng);
    CHECK(rs.deviation(x) == doctest::Approx(1.5 * std::sqrt(oracle::variance(x))).epsilon(1e-8));
  }

  CatalogSpec q6;
  q6.alpha = 0.6;
  const auto rq6 = revert_quadrangles(make_catalog_quadrangle(q6), make_catalog_quadrangle(q6));
  // half the sum of the upper and the reflected lower quantile sets
  const auto expected = (quantile_interval(kU5, 0.6) + quantile_interval(kU5, 0.4)) * 0.5;
  CHECK(rq6.statistic(kU5).distance(expected) < 1e-7);
}

TEST_CASE("error from a monotone risk") {
  Flags f;
  f.positively_homogeneous = f.monotone = f.coherent = true;
  const auto cv = error_from_coherent_risk([](const DiscreteRv& x) { return cvar_direct(x, 0.5); }, f);
  CHECK(cv(kSym) == doctest::Approx(1.0));
  CHECK(cv(DiscreteRv::constant(0)) == 0.0);
  const auto em = error_from_coherent_risk(expectation, f);
  CHECK(em(kSym2) == doctest::Approx(2.0));
}
