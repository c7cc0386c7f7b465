#include "doctest.h"
#include "oracles.hpp"

using namespace rq;

namespace {

Dataset intercept_only(const std::vector<double>& y) {
  Dataset d;
  d.target = y;
  d.features.assign(y.size(), {});
  return d;
}

Dataset line(std::mt19937_64& rng, std::size_t rows, double noise) {
  std::normal_distribution<double> n01;
  Dataset d;
  for (std::size_t i = 0; i < rows; ++i) {
    const double x = n01(rng);
    d.features.push_back({x});
    d.target.push_back(1.0 + 2.0 * x + noise * n01(rng));
  }
  return d;
}

// Normal equations for one regressor.
std::pair<double, double> ols(const Dataset& d) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double x = d.features[i][0], y = d.target[i];
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {(sy - b * sx) / n, b};
}

}  // namespace

TEST_CASE("zero-residual data is fitted exactly by every catalog error") {
  std::mt19937_64 rng(51);
  const auto d = line(rng, 12, 0.0);
  for (Family f : all_families()) {
    CatalogSpec s;
    s.family = f;
    s.alpha = f == Family::qsa ? 0.4 : 0.7;
    s.eps = 0.0;
    CAPTURE(family_name(f));
    const auto fit = fit_catalog(s, d);
    CHECK(fit.objective == doctest::Approx(0.0).epsilon(1e-6));
    if (f == Family::qsau) continue;
    CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(fit.coefficients[0] == doctest::Approx(2.0).epsilon(1e-5));
  }
}

TEST_CASE("intercept-only fits") {
  CHECK(fit_named({NamedModel::quantile, 0.5}, intercept_only({1, 2, 3})).intercept == doctest::Approx(2.0));
  CHECK(fit_expectile_mse(0.75, intercept_only({0, 1})).intercept == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(fit_named({NamedModel::expectile_pl, 0.5}, intercept_only({0, 1})).intercept == doctest::Approx(0.75).epsilon(1e-8));
  const auto svr = fit_named({NamedModel::svr, 5.0}, intercept_only({0, 1, 2}));
  CHECK(svr.objective == doctest::Approx(0.0));
  CHECK(svr.statistic_of_residual.width() > 0.0);
}

TEST_CASE("quantile LP fit equals an exhaustive breakpoint search") {
  std::mt19937_64 rng(52);
  for (int i = 0; i < 20; ++i) {
    const auto x = oracle::sample(rng, 3 + i % 6);
    const auto d = intercept_only(x.values());
    CatalogSpec s;
    s.alpha = 0.1 + 0.04 * i;
    const auto fit = fit_catalog(s, d);
    const auto loss = koenker_bassett_loss(s.alpha);
    const auto y = DiscreteRv::uniform(x.values());
    double best = kInf;
    for (double c : x.values()) best = std::min(best, loss.expect(y.shift(-c)));
    CHECK(fit.objective == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("least squares matches the normal equations") {
  std::mt19937_64 rng(53);
  const auto d = line(rng, 30, 0.5);
  const auto [a, b] = ols(d);
  const auto fit = fit_least_squares(d);
  CHECK(fit.intercept == doctest::Approx(a).epsilon(1e-9));
  CHECK(fit.coefficients[0] == doctest::Approx(b).epsilon(1e-9));
  CatalogSpec sm;
  sm.family = Family::standard_mean;
  const auto via_catalog = fit_catalog(sm, d);
  CHECK(via_catalog.coefficients[0] == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("expectile fits agree between the square and piecewise routes") {
  // Both errors share the expectile statistic, so intercept-only and exact
  // fits coincide; with noisy regressors their deviations differ.
  std::mt19937_64 rng(54);
  for (int i = 0; i < 8; ++i) {
    const auto y = oracle::sample(rng, 3 + i % 5);
    const auto d = intercept_only(y.values());
    const double k = 0.5 + i;
    CatalogSpec pl;
    pl.family = Family::expectile_pl;
    pl.k = k;
    const double mse = fit_expectile_mse(expectile_level_from_k(k), d).intercept;
    CHECK(mse == doctest::Approx(fit_catalog(pl, d).intercept).epsilon(1e-7));
    CHECK(mse == doctest::Approx(oracle::expectile(DiscreteRv::uniform(y.values()), expectile_level_from_k(k))).epsilon(1e-7));
  }
  const auto exact = line(rng, 10, 0.0);
  CatalogSpec pl;
  pl.family = Family::expectile_pl;
  pl.k = 2.0;
  CHECK(fit_expectile_mse(expectile_level_from_k(2.0), exact).coefficients[0] ==
        doctest::Approx(fit_catalog(pl, exact).coefficients[0]).epsilon(1e-6));
}

TEST_CASE("shifting the target moves only the intercept") {
  std::mt19937_64 rng(55);
  auto d = line(rng, 14, 1.0);
  CatalogSpec s;
  s.alpha = 0.3;
  const auto a = fit_catalog(s, d);
  for (double& y : d.target) y += 4.0;
  const auto b = fit_catalog(s, d);
  CHECK(b.intercept - a.intercept == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(b.coefficients[0] == doctest::Approx(a.coefficients[0]).epsilon(1e-9));
}

TEST_CASE("black-box errors fit finite coefficients") {
  std::mt19937_64 rng(56);
  const auto d = line(rng, 12, 0.3);
  const auto sd = make_catalog_quadrangle([] {
    CatalogSpec s;
    s.family = Family::standard_mean;
    return s;
  }());
  const auto fit = fit_linear(sd.error_fn(), d);
  const auto [a, b] = ols(d);
  CHECK(std::isfinite(fit.intercept));
  CHECK(fit.coefficients[0] == doctest::Approx(b).epsilon(1e-4));
}

TEST_CASE("error and deviation fits are equivalent") {
  std::mt19937_64 rng(57);
  const auto d = line(rng, 11, 1.0);
  CatalogSpec s;
  s.alpha = 0.5;
  const auto q = make_catalog_quadrangle(s);
  const auto fit = fit_catalog(s, d);
  const auto eq = regression_equivalence_check(q, fit, d);
  CHECK(eq.gap < 1e-6);
  CHECK(eq.statistic_contains_zero);
  CHECK(track_statistic(fit, q));
  auto off = fit;
  off.intercept += 10.0;
  off.residual_rv = residuals(d, off.intercept, off.coefficients);
  CHECK_FALSE(track_statistic(off, q));

  const auto zero = line(rng, 8, 0.0);
  const auto zfit = fit_catalog(s, zero);
  const auto zeq = regression_equivalence_check(q, zfit, zero);
  CHECK(zeq.error_objective == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(zeq.deviation_objective == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("median regression tracks a symmetric two-point noise model") {
  Dataset d;
  // both noise signs at every x: |a| + |b| >= |a - b| = 2 per pair, attained by the true line
  for (int i = 0; i < 20; ++i) {
    const double x = (i / 2) / 4.0;
    d.features.push_back({x});
    d.target.push_back(1.0 + 2.0 * x + (i % 2 ? 1.0 : -1.0));
  }
  const auto fit = fit_named({NamedModel::quantile, 0.5}, d);
  CatalogSpec s;
  s.alpha = 0.5;
  CHECK(track_statistic(fit, make_catalog_quadrangle(s)));
  CHECK(fit.objective == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("named models") {
  CHECK(parse_named_model("svr") == NamedModel::svr);
  CHECK_THROWS_AS(parse_named_model("lasso"), ValidationError);
  CHECK(to_catalog({NamedModel::expectile_pl, 2.0}).k == 2.0);
  CHECK(to_catalog({NamedModel::svr, 0.3}).family == Family::qsau);
}

TEST_CASE("CVaR margin classifier") {
  Dataset sep;
  sep.features = {{-1.0}, {1.0}};
  sep.target = {-1, 1};
  CHECK(nu_svc(0.5, sep).objective < 0.0);

  Dataset tie;
  tie.features = {{0.5}, {0.5}};
  tie.target = {-1, 1};
  CHECK(nu_svc(0.5, tie).objective >= -1e-9);

  // alpha = 0 is the mean margin loss: E[-Y (w x + w0)] with balanced labels
  // is minimized at w = sign of the class mean difference, |w| = 1.
  Dataset bal;
  bal.features = {{-2.0}, {-1.0}, {1.0}, {3.0}};
  bal.target = {-1, -1, 1, 1};
  const auto r = nu_svc(0.0, bal);
  CHECK(r.direction[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.objective == doctest::Approx(-(2.0 + 1.0 + 1.0 + 3.0) / 4.0).epsilon(1e-6));
}
