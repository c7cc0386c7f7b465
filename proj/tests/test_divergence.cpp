#include "doctest.h"
#include "oracles.hpp"

using namespace rq;

namespace {

const DiscreteRv kSym({-1, 1}, {0.5, 0.5});
const DiscreteRv kU5 = DiscreteRv::uniform({1, 2, 3, 4, 5});

// ln E e^X with the max factored out.
double log_mean_exp(const DiscreteRv& x, double s) {
  const double m = x.max() * s;
  return m + std::log(x.expect([&](double t) { return std::exp(t * s - m); }));
}

// inf over a log grid of lambda, then a local refinement.
double evar_by_grid(const DiscreteRv& x, double beta) {
  auto f = [&](double lam) { return lam * (beta + log_mean_exp(x, 1.0 / lam)); };
  double best_l = 1.0, best = f(1.0);
  for (double l = 1e-4; l < 1e4; l *= 1.01)
    if (f(l) < best) best = f(l), best_l = l;
  for (double l = best_l / 1.01; l < best_l * 1.01; l *= 1.000001) best = std::min(best, f(l));
  return std::min(best, x.max());
}

}  // namespace

TEST_CASE("divergence values on densities") {
  const std::vector<double> half{0.5, 0.5};
  CHECK(divergence_value(phi_kl(), {1, 1}, half) == 0.0);
  CHECK(divergence_value(phi_pearson(), {0, 2}, half) == doctest::Approx(1.0));
  CHECK(divergence_value(phi_tv(), {0.5, 1.5}, half) == doctest::Approx(0.5));
  CHECK(divergence_value(phi_kl(), {-0.5, 2.5}, half) == kInf);
  CHECK(std::isfinite(divergence_value(phi_extended_pearson(), {-0.5, 2.5}, half)));
}

TEST_CASE("conjugates satisfy Fenchel-Young on a grid") {
  for (const auto& name : phi_names()) {
    CAPTURE(name);
    const auto phi = make_phi(name, 0.7);
    CHECK(phi.phi(1.0) == doctest::Approx(0.0));
    CHECK(conjugate_gap(phi) < 1e-6);
  }
  CHECK_THROWS_AS(make_phi("hellinger"), ValidationError);
}

TEST_CASE("family of a parent error by perspective") {
  Functional second_moment = [](const DiscreteRv& x) { return x.expect([](double t) { return t * t; }); };
  CHECK(family_eval_perspective(second_moment, 1.0, kSym).value == doctest::Approx(2.0).epsilon(1e-7));
  Functional var = [](const DiscreteRv& x) { return oracle::variance(x); };
  CHECK(family_eval_perspective(var, 1.0, kSym).value == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(family_eval_perspective(var, 4.0, kU5).value == doctest::Approx(2 * 2 * std::sqrt(2.0)).epsilon(1e-7));
  CHECK(family_eval_perspective(second_moment, 3.0, DiscreteRv::constant(0)).value == doctest::Approx(0.0));
}

TEST_CASE("family of a divergence ball by envelope") {
  const auto tv = family_eval_envelope(phi_tv(), 0.8, kU5);
  CHECK(tv.value == doctest::Approx(0.4 * 5 + 0.6 * cvar_direct(kU5, 0.4)).epsilon(1e-10));
  CHECK(tv.value == doctest::Approx(4.4).epsilon(1e-10));
  double mass = 0.0;
  for (std::size_t i = 0; i < kU5.size(); ++i) mass += kU5.prob(i) * tv.density[i];
  CHECK(mass == doctest::Approx(1.0));

  CHECK(family_eval_envelope(phi_kl(), 1e6, kU5).value == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(family_eval_envelope(phi_kl(), 1e-8, kU5).value == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("envelope matches a simplex grid on three atoms") {
  std::mt19937_64 rng(31);
  for (const char* name : {"kl", "pearson", "tv"}) {
    const auto phi = make_phi(name);
    for (int i = 0; i < 3; ++i) {
      const auto x = oracle::sample(rng, 3);
      const double tau = 0.2 + 0.3 * i;
      const auto j = [&](const std::vector<double>& q) { return divergence_value(phi, q, x.probs()); };
      const double grid = oracle::simplex_grid_sup(x, j, tau, 300);
      const double env = family_eval_envelope(phi, tau, x).value;
      CAPTURE(name);
      CHECK(env >= grid - 1e-9);
      CHECK(env - grid < 0.02 * (x.max() - x.min()));
    }
  }
}

TEST_CASE("family value is nondecreasing and concave in the budget") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 5; ++i) {
    const auto x = oracle::sample(rng, 4);
    double prev = -kInf;
    std::vector<double> vals;
    for (double tau = 0.05; tau < 3.0; tau += 0.25) {
      const double v = family_eval_envelope(phi_kl(), tau, x).value;
      CHECK(v >= prev - 1e-9);
      vals.push_back(prev = v);
    }
    for (std::size_t k = 1; k + 1 < vals.size(); ++k) CHECK(vals[k] >= 0.5 * (vals[k - 1] + vals[k + 1]) - 1e-7);
  }
}

TEST_CASE("divergence quadrangles") {
  const auto ep = make_divergence_quadrangle(phi_extended_pearson(), 1.0);
  CHECK(ep.risk(kSym) == doctest::Approx(1.0).epsilon(1e-9));
  const auto tv = make_divergence_quadrangle(phi_tv(), 0.8);
  CHECK(tv.risk(kU5) == doctest::Approx(4.4).epsilon(1e-9));
  CHECK_THROWS_AS(make_divergence_quadrangle(phi_kl(), 0.0), ValidationError);

  std::mt19937_64 rng(33);
  for (int i = 0; i < 8; ++i) {
    const auto x = oracle::sample(rng, 2 + i % 4);
    const auto g = make_divergence_quadrangle(phi_gen_extended_pearson(0.7), 0.5 + i);
    CHECK(g.statistic(x).mid() == doctest::Approx(oracle::expectile(x, 0.7)).epsilon(1e-7));
    const auto kl = make_divergence_quadrangle(phi_kl(), 0.3);
    const auto generic = make_divergence_quadrangle_generic(phi_kl(), 0.3);
    CHECK(kl.risk(x) == doctest::Approx(generic.risk(x)).epsilon(1e-6));
    CHECK(kl.risk(x) - kl.deviation(x) == doctest::Approx(expectation(x)).epsilon(1e-9));
  }
}

TEST_CASE("entropic risk") {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 10; ++i) {
    const auto x = oracle::sample(rng, 2 + i % 5, -2, 2);
    const double beta = 0.1 + 0.3 * i;
    const auto e = evar(x, beta);
    CHECK(e.value == doctest::Approx(evar_by_grid(x, beta)).epsilon(1e-7));
    if (e.lambda > 0) CHECK(std::abs(evar_stationarity(x, beta, e.lambda)) < 1e-6);
    CHECK(e.value >= expectation(x) - 1e-12);
    CHECK(e.value <= x.max() + 1e-12);
  }
  CHECK(evar(DiscreteRv::constant(2.0), 1.0).value == doctest::Approx(2.0));
  // overflow-safe for large values
  CHECK(std::isfinite(evar(DiscreteRv({1e3, 2e3}, {0.5, 0.5}), 0.1).value));
}

TEST_CASE("indicator regret family reproduces CVaR") {
  std::mt19937_64 rng(35);
  for (int i = 0; i < 10; ++i) {
    const auto x = oracle::sample(rng, 3);
    const double a = 0.2 + 0.06 * i;
    const Functional fam = [a](const DiscreteRv& y) { return cvar_indicator_family(y, a / (1 - a)); };
    CHECK(regret_to_risk_value(fam, x) == doctest::Approx(oracle::cvar(x, a)).epsilon(1e-6));
  }
  CHECK(cvar_indicator_regret(DiscreteRv({-1, 0}, {0.5, 0.5})) == 0.0);
  CHECK(cvar_indicator_regret(DiscreteRv({1, 2}, {0.5, 0.5})) == kInf);
}

TEST_CASE("classifying divergence functionals") {
  const auto stoch = classify_divergence(expected_phi(phi_kl(), true));
  CHECK(stoch.kind == StochasticDivergenceJ::Kind::stochastic_divergence);
  const auto root = classify_divergence(expected_phi(phi_kl(), false));
  CHECK(root.kind == StochasticDivergenceJ::Kind::divergence_root);
  StochasticDivergenceJ norm{[](const std::vector<double>& q, const std::vector<double>& p) {
                               double s = 0.0;
                               for (std::size_t i = 0; i < q.size(); ++i) s += p[i] * q[i] * q[i];
                               return std::sqrt(s);
                             },
                             "l2"};
  const auto bad = classify_divergence(norm);
  CHECK_FALSE(bad.normalized);
  CHECK(bad.kind == StochasticDivergenceJ::Kind::general);
}
