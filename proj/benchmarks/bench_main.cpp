#include <random>

#include <benchmark/benchmark.h>

#include "rq/rq.hpp"

namespace {

rq::DiscreteRv sample(std::size_t atoms, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::vector<double> v(atoms);
  for (double& x : v) x = n01(rng);
  return rq::DiscreteRv::uniform(v);
}

rq::Dataset line_data(std::size_t rows) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  rq::Dataset d;
  for (std::size_t i = 0; i < rows; ++i) {
    const double x = n01(rng);
    d.features.push_back({x});
    d.target.push_back(1.0 + 2.0 * x + n01(rng));
  }
  return d;
}

void BM_CvarDirect(benchmark::State& state) {
  const auto x = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rq::cvar_direct(x, 0.9));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CvarDirect)->RangeMultiplier(8)->Range(8, 1 << 15)->Complexity();

void BM_CatalogEval(benchmark::State& state) {
  const auto x = sample(256);
  rq::CatalogSpec spec;
  spec.family = rq::all_families()[static_cast<std::size_t>(state.range(0))];
  spec.alpha = spec.family == rq::Family::qsa ? 0.4 : 0.7;
  spec.eps = 0.3;
  const auto q = rq::make_catalog_quadrangle(spec);
  state.SetLabel(rq::family_name(spec.family));
  for (auto _ : state) {
    benchmark::DoNotOptimize(q.risk(x));
    benchmark::DoNotOptimize(q.statistic(x));
  }
}
BENCHMARK(BM_CatalogEval)->DenseRange(0, 8);

void BM_ErrorProjection(benchmark::State& state) {
  const auto x = sample(static_cast<std::size_t>(state.range(0)));
  rq::CatalogSpec spec;
  spec.family = rq::Family::standard_mean;
  const auto err = rq::make_catalog_quadrangle(spec).error_fn();
  for (auto _ : state) benchmark::DoNotOptimize(rq::project_error(err, x));
}
BENCHMARK(BM_ErrorProjection)->Arg(16)->Arg(256);

void BM_SolveLp(benchmark::State& state) {
  // CVaR regret LP over n scenarios: min c + E[z] / (1 - a), z >= x - c, z >= 0
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = sample(n);
  rq::LpProblem lp;
  lp.c.assign(n + 1, 1.0 / (n * 0.1));
  lp.c[0] = 1.0;
  lp.lower.assign(n + 1, 0.0);
  lp.lower[0] = -rq::kInf;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(n + 1, 0.0);
    row[0] = -1.0;
    row[i + 1] = -1.0;
    lp.a_le.push_back(row);
    lp.b_le.push_back(-x.value(i));
  }
  for (auto _ : state) benchmark::DoNotOptimize(rq::solve_lp(lp));
}
BENCHMARK(BM_SolveLp)->Arg(16)->Arg(64)->Arg(128);

void BM_QuantileRegression(benchmark::State& state) {
  const auto d = line_data(static_cast<std::size_t>(state.range(0)));
  rq::CatalogSpec spec;
  spec.alpha = 0.7;
  const auto form = *rq::pl_form(spec);
  for (auto _ : state) benchmark::DoNotOptimize(rq::fit_pl(form, d));
}
BENCHMARK(BM_QuantileRegression)->Arg(20)->Arg(80);

void BM_FamilyPerspective(benchmark::State& state) {
  const auto x = sample(64);
  const auto parent = rq::phi_parent_risk(rq::phi_kl());
  for (auto _ : state) benchmark::DoNotOptimize(rq::family_eval_perspective(parent, 0.5, x));
}
BENCHMARK(BM_FamilyPerspective);

void BM_FamilyEnvelope(benchmark::State& state) {
  const auto x = sample(64);
  const auto phi = rq::phi_kl();
  for (auto _ : state) benchmark::DoNotOptimize(rq::family_eval_envelope(phi, 0.5, x));
}
BENCHMARK(BM_FamilyEnvelope);

void BM_Evar(benchmark::State& state) {
  const auto x = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rq::evar(x, 0.5));
}
BENCHMARK(BM_Evar)->Arg(64)->Arg(4096);

void BM_EpiPrimal(benchmark::State& state) {
  const auto x = sample(static_cast<std::size_t>(state.range(0)));
  const auto spec = rq::cvar_epi_spec(0.5, rq::quadratic_kernel(1.0), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(rq::epi_risk_primal(spec, x));
}
BENCHMARK(BM_EpiPrimal)->Arg(2)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PortfolioCvarLp(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  rq::ScenarioSet s;
  for (int i = 0; i < state.range(0); ++i) s.returns.push_back({0.01 * n01(rng), 0.02 * n01(rng), 0.015 * n01(rng)});
  for (auto _ : state) benchmark::DoNotOptimize(rq::portfolio_cvar_lp(0.9, s));
}
BENCHMARK(BM_PortfolioCvarLp)->Arg(20)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
