#include "doctest.h"
#include "oracles.hpp"

using namespace rq;

TEST_CASE("scalar convex minimization") {
  auto m = minimize_scalar_convex([](double c) { return (c - 3) * (c - 3); });
  CHECK(m.argmin == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(m.value == doctest::Approx(0.0));
  m = minimize_scalar_convex([](double c) { return std::abs(c); });
  CHECK(std::abs(m.argmin) < 1e-9);
  const auto u5 = DiscreteRv::uniform({1, 2, 3, 4, 5});
  m = minimize_scalar_convex([&](double c) { return u5.expect([c](double t) { return (t - c) * (t - c); }); });
  CHECK(m.argmin == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(m.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("unbounded and infinite objectives") {
  CHECK(minimize_scalar_convex([](double c) { return c; }).unbounded);
  ScalarOptions fixed;
  fixed.expand = false;
  CHECK_THROWS_AS(minimize_scalar_convex([](double) { return kInf; }, 0, 1, fixed), ValidationError);
  // +inf off the domain [2, inf)
  const auto m = minimize_scalar_convex([](double c) { return c < 2 ? kInf : c; });
  CHECK(m.argmin == doctest::Approx(2.0));
}

TEST_CASE("flat bottoms of piecewise-linear functions") {
  const auto u3 = DiscreteRv::uniform({1, 2, 3});
  auto kb = [&](double c) { return u3.expect([c](double t) { return std::max(t - c, 0.0) + std::max(c - t, 0.0); }); };
  CHECK(argmin_interval_pwl({1, 2, 3}, kb) == StatInterval(2, 2));
  const DiscreteRv sym({-2, 2}, {0.5, 0.5});
  auto vap = [&](double c) { return sym.expect([c](double t) { return std::max(std::abs(t - c) - 1.0, 0.0); }); };
  CHECK(argmin_interval_pwl({-3, -1, 1, 3}, vap) == StatInterval(-1, 1));
  CHECK(argmin_interval_pwl({5}, [](double c) { return std::abs(c - 5); }) == StatInterval(5, 5));
}

TEST_CASE("scalar minimizer lands inside the exact flat bottom") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 60; ++i) {
    SamplerOptions so;
    so.lattice = 1.0;
    so.uniform_probs = true;
    const auto x = random_rv(rng, so);
    auto f = [&](double c) { return x.expect([c](double t) { return std::abs(t - c); }); };
    const auto exact = argmin_interval_pwl(x.values(), f);
    const auto m = minimize_scalar_convex(f, x.min() - 1, x.max() + 1);
    CHECK(exact.contains(m.argmin, 1e-8));
    CHECK(argmin_set(f, m, probe_scale(x)).distance(exact) < 1e-7);
  }
}

TEST_CASE("subgradient on the simplex") {
  const std::size_t n = 4;
  auto f = [](const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) s += v * v;
    return s;
  };
  auto g = [](std::vector<double> w) {
    for (double& v : w) v *= 2;
    return w;
  };
  auto proj = [](std::vector<double> w) {
    // sort-based Euclidean projection onto the simplex
    std::vector<double> u = w;
    std::sort(u.rbegin(), u.rend());
    double css = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      css += u[k];
      const double t = (css - 1.0) / (k + 1.0);
      if (u[k] - t > 0) theta = t;
    }
    for (double& v : w) v = std::max(v - theta, 0.0);
    return w;
  };
  SubgradientOptions o;
  o.steps = 4000;
  const auto r = minimize_subgradient(f, g, proj, {1, 0, 0, 0}, o);
  for (double v : r.x) CHECK(v == doctest::Approx(1.0 / n).epsilon(1e-3));
}

TEST_CASE("subgradient matches an LP-expressible objective") {
  // min_x max(|x1 - 1|, |x2 + 2|) + 0.5 |x1 + x2|
  auto f = [](const std::vector<double>& x) {
    return std::max(std::abs(x[0] - 1), std::abs(x[1] + 2)) + 0.5 * std::abs(x[0] + x[1]);
  };
  auto sub = [&](const std::vector<double>& x) {
    const double h = 1e-7;
    std::vector<double> d(2);
    for (int i = 0; i < 2; ++i) {
      auto up = x, dn = x;
      up[i] += h, dn[i] -= h;
      d[i] = (f(up) - f(dn)) / (2 * h);
    }
    return d;
  };
  const auto r = minimize_subgradient(f, sub, [](std::vector<double> x) { return x; }, {0, 0});
  // LP: variables (x1, x2, t, s): min t + 0.5 s
  LpProblem lp;
  lp.c = {0, 0, 1, 0.5};
  lp.a_le = {{1, 0, -1, 0}, {-1, 0, -1, 0}, {0, 1, -1, 0}, {0, -1, -1, 0}, {1, 1, 0, -1}, {-1, -1, 0, -1}};
  lp.b_le = {1, -1, -2, 2, 0, 0};
  lp.lower = {-kInf, -kInf, 0, 0};
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(r.value == doctest::Approx(sol.objective).epsilon(1e-4));
}

TEST_CASE("small linear programs") {
  LpProblem p;
  p.c = {0, -1};
  p.a_eq = {{0.5, 0.5}};
  p.b_eq = {1};
  p.upper = {2, 2};
  auto s = solve_lp(p);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.x[0] == doctest::Approx(0.0));
  CHECK(s.x[1] == doctest::Approx(2.0));

  LpProblem one;
  one.c = {0};
  one.a_eq = {{1}};
  one.b_eq = {1};
  s = solve_lp(one);
  CHECK(s.status == LpStatus::optimal);
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(0.0));

  LpProblem unb;
  unb.c = {-1};
  CHECK(solve_lp(unb).status == LpStatus::unbounded);

  LpProblem inf;
  inf.c = {1};
  inf.a_le = {{1}};
  inf.b_le = {-1};
  CHECK(solve_lp(inf).status == LpStatus::infeasible);
}

TEST_CASE("simplex agrees with vertex enumeration") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1), pos(0.5, 2);
  int solved = 0;
  for (int t = 0; t < 80; ++t) {
    const std::size_t n = 2 + t % 3, m = 1 + t % 4;
    LpProblem p;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (std::size_t k = 0; k < n; ++k) p.c.push_back(u(rng));
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> a(n);
      for (double& v : a) v = u(rng);
      p.a_le.push_back(a), p.b_le.push_back(pos(rng));
      rows.push_back(a), rhs.push_back(p.b_le.back());
    }
    p.upper.assign(n, 3.0);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> lo(n, 0.0), hi(n, 0.0);
      lo[k] = -1, hi[k] = 1;
      rows.push_back(lo), rhs.push_back(0.0);
      rows.push_back(hi), rhs.push_back(3.0);
    }
    const auto s = solve_lp(p);
    const double ref = oracle::lp_by_vertices(p.c, rows, rhs);
    REQUIRE(s.status == LpStatus::optimal);  // x = 0 is feasible and the box is bounded
    CHECK(s.objective == doctest::Approx(ref).epsilon(1e-8));
    ++solved;
  }
  CHECK(solved == 80);
}

TEST_CASE("nested golden keeps to its box") {
  auto f = [](const std::vector<double>& x) { return (x[0] + 1) * (x[0] + 1) + (x[1] - 5) * (x[1] - 5); };
  const auto m = minimize_nested(f, {0, 0}, {2, 2});
  CHECK(m.x[0] == doctest::Approx(0.0));
  CHECK(m.x[1] == doctest::Approx(2.0));
  CHECK(m.value == doctest::Approx(10.0));
}

TEST_CASE("bisection helper") {
  CHECK(last_nonnegative([](double t) { return 1.5 - t; }, 0, 4) == doctest::Approx(1.5));
  CHECK(last_nonnegative([](double t) { return -1 - t; }, 0, 4) == 0.0);
  CHECK(last_nonnegative([](double) { return 1.0; }, 0, 4) == 4.0);
}
