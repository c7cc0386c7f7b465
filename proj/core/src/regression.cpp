#include "rq/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rq {

std::vector<double> Dataset::probs() const {
  if (weights.empty()) return std::vector<double>(rows(), 1.0 / static_cast<double>(rows()));
  return weights;
}

void Dataset::validate() const {
  if (target.empty()) throw ValidationError("dataset has no observations");
  if (!features.empty() && features.size() != target.size())
    throw ValidationError("feature rows and target length differ");
  for (const auto& r : features)
    if (r.size() != regressors()) throw ValidationError("feature rows have different lengths");
  if (!weights.empty()) {
    if (weights.size() != target.size()) throw ValidationError("weights and target length differ");
    double s = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("weights must be nonnegative");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-9) throw ValidationError("weights must sum to 1");
  }
}

namespace {

double pos(double t) { return t > 0.0 ? t : 0.0; }

double predict(const Dataset& d, std::size_t i, double c0, const std::vector<double>& c) {
  double s = c0;
  for (std::size_t j = 0; j < c.size(); ++j) s += c[j] * d.features[i][j];
  return s;
}

std::vector<double> residual_values(const Dataset& d, double c0, const std::vector<double>& c) {
  std::vector<double> r(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) r[i] = d.target[i] - (d.features.empty() ? c0 : predict(d, i, c0, c));
  return r;
}

Functional pl_error(const PlForm& f) {
  return [f](const DiscreteRv& z) {
    double best = -kInf;
    for (const auto& pc : f.pieces) {
      const double v = z.expect([&](double t) { return pc.up * pos(t - f.tube) + pc.down * pos(-t - f.tube); });
      best = std::max(best, v + pc.offset);
    }
    return best;
  };
}

// Design with an intercept column, rows scaled by sqrt(weight).
Eigen::MatrixXd weighted_design(const Dataset& d, const std::vector<double>& w) {
  const std::size_t n = d.rows(), m = d.regressors();
  Eigen::MatrixXd a(n, m + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sqrt(w[i]);
    a(static_cast<Eigen::Index>(i), 0) = s;
    for (std::size_t j = 0; j < m; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = s * d.features[i][j];
  }
  return a;
}

std::vector<double> weighted_ls(const Dataset& d, const std::vector<double>& w) {
  const Eigen::MatrixXd a = weighted_design(d, w);
  Eigen::VectorXd b(static_cast<Eigen::Index>(d.rows()));
  for (std::size_t i = 0; i < d.rows(); ++i) b(static_cast<Eigen::Index>(i)) = std::sqrt(w[i]) * d.target[i];
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return std::vector<double>(c.data(), c.data() + c.size());
}

FitResult finish(const Dataset& d, double c0, std::vector<double> c, std::string method) {
  FitResult r;
  r.intercept = c0;
  r.coefficients = std::move(c);
  r.residual_rv = residuals(d, r.intercept, r.coefficients);
  r.statistic_of_residual = StatInterval::point(0.0);
  r.method = std::move(method);
  return r;
}

// Box half-width for slope searches, from the least-squares slopes and data ranges.
double slope_box(const Dataset& d, const std::vector<double>& ls) {
  double b = 1.0;
  for (std::size_t j = 1; j < ls.size(); ++j) b = std::max(b, std::abs(ls[j]));
  const auto [ylo, yhi] = std::minmax_element(d.target.begin(), d.target.end());
  double xrange = kInf;
  for (std::size_t j = 0; j < d.regressors(); ++j) {
    double lo = kInf, hi = -kInf;
    for (const auto& row : d.features) lo = std::min(lo, row[j]), hi = std::max(hi, row[j]);
    if (hi > lo) xrange = std::min(xrange, hi - lo);
  }
  const double yr = *yhi - *ylo;
  return 2.0 * (b + (std::isfinite(xrange) ? yr / xrange : yr) + 1.0);
}

struct SlopeMin {
  std::vector<double> slopes;
  double value = kInf;
  double gap = 0.0;
};

// Minimizes a convex function of the slopes: nested golden up to two
// regressors (box doubled while the minimum touches it), multi-start
// finite-difference subgradient beyond.
SlopeMin minimize_slopes(const VectorFn& f, const Dataset& d, std::uint64_t seed) {
  const std::size_t m = d.regressors();
  if (m == 0) return {{}, f({}), 0.0};
  const auto ls = weighted_ls(d, d.probs());
  std::vector<double> center(ls.begin() + 1, ls.end());
  double box = slope_box(d, ls);
  if (m <= 2) {
    ScalarOptions o;
    o.grid = m == 1 ? 65 : 33;
    for (int attempt = 0; attempt < 6; ++attempt) {
      std::vector<double> lo(m), hi(m);
      for (std::size_t j = 0; j < m; ++j) lo[j] = center[j] - box, hi[j] = center[j] + box;
      const auto r = minimize_nested(f, lo, hi, o);
      bool edge = false;
      for (std::size_t j = 0; j < m; ++j)
        edge = edge || std::abs(r.x[j] - lo[j]) < 1e-6 * box || std::abs(r.x[j] - hi[j]) < 1e-6 * box;
      if (!edge) return {r.x, r.value, 0.0};
      box *= 4.0;
    }
    throw ConvergenceError("slope search kept hitting its box; the fit may be unbounded");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto grad = [&](const std::vector<double>& x) {
    std::vector<double> g(m);
    const double h = 1e-7 * (1.0 + box);
    for (std::size_t j = 0; j < m; ++j) {
      auto up = x, dn = x;
      up[j] += h, dn[j] -= h;
      g[j] = (f(up) - f(dn)) / (2.0 * h);
    }
    return g;
  };
  auto ident = [](std::vector<double> x) { return x; };
  SlopeMin best;
  double second = kInf;
  for (int s = 0; s < 5; ++s) {
    auto x0 = center;
    if (s > 0)
      for (auto& v : x0) v += 0.1 * box * nd(rng);
    SubgradientOptions o;
    o.steps = 20000;
    o.step0 = 0.05 * box;
    const auto r = minimize_subgradient(f, grad, ident, x0, o);
    if (r.value < best.value) {
      second = best.value;
      best.slopes = r.x, best.value = r.value;
    } else {
      second = std::min(second, r.value);
    }
  }
  best.gap = std::isfinite(second) ? second - best.value : 0.0;
  return best;
}

}  // namespace

DiscreteRv residuals(const Dataset& d, double intercept, const std::vector<double>& coef) {
  return DiscreteRv(residual_values(d, intercept, coef), d.probs());
}

std::optional<PlForm> pl_form(const CatalogSpec& s) {
  switch (s.family) {
    case Family::quantile: return PlForm{{{s.alpha / (1.0 - s.alpha), 1.0, 0.0}}, 0.0};
    case Family::qsau: return PlForm{{{1.0, 1.0, 0.0}}, s.eps};
    case Family::expectile_pl: return PlForm{{{-1.0, 1.0, 0.0}, {1.0 / s.k, 0.0, 0.0}}, 0.0};
    case Family::mean_pl: return PlForm{{{0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}}, 0.0};
    case Family::biased_mean:
      return PlForm{{{0.0, 1.0, -std::max(s.x, 0.0)}, {1.0, 0.0, -std::max(-s.x, 0.0)}}, 0.0};
    default: return std::nullopt;
  }
}

FitResult fit_pl(const PlForm& form, const Dataset& d) {
  d.validate();
  if (form.pieces.empty()) throw ValidationError("piecewise-linear error needs at least one piece");
  bool nonneg = true;
  for (const auto& pc : form.pieces) nonneg = nonneg && pc.up >= 0.0 && pc.down >= 0.0;
  if (!nonneg && form.tube != 0.0) throw ValidationError("a tube needs nonnegative piece coefficients");
  const std::size_t n = d.rows(), m = d.regressors();
  const bool multi = form.pieces.size() > 1;
  // variables: c0, c_1..c_m, u_1..u_n, v_1..v_n, [t]
  const std::size_t nc = m + 1, nu = nc, nv = nc + n, nt = nc + 2 * n;
  const std::size_t nvar = nt + (multi ? 1 : 0);
  const auto p = d.probs();
  LpProblem lp;
  lp.c.assign(nvar, 0.0);
  lp.lower.assign(nvar, 0.0);
  lp.upper.assign(nvar, kInf);
  for (std::size_t j = 0; j < nc; ++j) lp.lower[j] = -kInf;
  auto fit_row = [&](std::size_t i, double sign) {
    std::vector<double> r(nvar, 0.0);
    r[0] = sign;
    for (std::size_t j = 0; j < m; ++j) r[1 + j] = sign * d.features[i][j];
    return r;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (nonneg) {
      // u >= r - tube, v >= -r - tube with r = y - fit
      auto ru = fit_row(i, -1.0);
      ru[nu + i] = -1.0;
      lp.a_le.push_back(ru), lp.b_le.push_back(form.tube - d.target[i]);
      auto rv = fit_row(i, 1.0);
      rv[nv + i] = -1.0;
      lp.a_le.push_back(rv), lp.b_le.push_back(d.target[i] + form.tube);
    } else {
      auto r = fit_row(i, 1.0);
      r[nu + i] = 1.0, r[nv + i] = -1.0;
      lp.a_eq.push_back(r), lp.b_eq.push_back(d.target[i]);
    }
  }
  if (multi) {
    lp.lower[nt] = -kInf;
    lp.c[nt] = 1.0;
    for (const auto& pc : form.pieces) {
      std::vector<double> r(nvar, 0.0);
      for (std::size_t i = 0; i < n; ++i) r[nu + i] = p[i] * pc.up, r[nv + i] = p[i] * pc.down;
      r[nt] = -1.0;
      lp.a_le.push_back(r), lp.b_le.push_back(-pc.offset);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) lp.c[nu + i] = p[i] * form.pieces[0].up, lp.c[nv + i] = p[i] * form.pieces[0].down;
  }
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal)
    throw ConvergenceError(std::string("regression LP is ") + to_string(sol.status));
  auto r = finish(d, sol.x[0], std::vector<double>(sol.x.begin() + 1, sol.x.begin() + static_cast<long>(nc)), "lp");
  const ErrorFn err{pl_error(form), {}, "piecewise linear", std::nullopt};
  r.objective = err(r.residual_rv);
  r.gap = std::abs(r.objective - (sol.objective + (multi ? 0.0 : form.pieces[0].offset)));
  r.non_unique = sol.alternative_optima;
  r.statistic_of_residual = project_error(err, r.residual_rv).statistic;
  return r;
}

FitResult fit_least_squares(const Dataset& d) {
  d.validate();
  const auto c = weighted_ls(d, d.probs());
  auto r = finish(d, c[0], std::vector<double>(c.begin() + 1, c.end()), "least_squares");
  r.objective = r.residual_rv.expect([](double t) { return t * t; });
  r.statistic_of_residual = StatInterval::point(expectation(r.residual_rv));
  return r;
}

FitResult fit_expectile_mse(double q, const Dataset& d) {
  d.validate();
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("expectile level q must lie in (0,1)");
  const auto p = d.probs();
  auto c = weighted_ls(d, p);
  std::vector<int> side(d.rows(), 2);
  // reweighted least squares: each pass is a Newton step on the piecewise quadratic
  for (int it = 0; it < 200; ++it) {
    const auto r = residual_values(d, c[0], std::vector<double>(c.begin() + 1, c.end()));
    std::vector<int> now(d.rows());
    std::vector<double> w(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) {
      now[i] = r[i] > 0.0 ? 1 : 0;
      w[i] = p[i] * (now[i] ? q : 1.0 - q);
    }
    if (now == side) break;
    side = now;
    c = weighted_ls(d, w);
  }
  auto r = finish(d, c[0], std::vector<double>(c.begin() + 1, c.end()), "irls");
  r.objective = r.residual_rv.expect([q](double t) { return t > 0.0 ? q * t * t : (1.0 - q) * t * t; });
  r.statistic_of_residual = StatInterval::point(expectile_value(r.residual_rv, q));
  return r;
}

FitResult fit_linear(const ErrorFn& err, const Dataset& d, std::uint64_t seed) {
  d.validate();
  const auto p = d.probs();
  std::vector<double> zero;
  // the intercept is profiled out exactly by the error projection
  auto profiled = [&](const std::vector<double>& slopes) {
    return project_error(err, DiscreteRv(residual_values(d, 0.0, slopes), p)).value;
  };
  const auto best = minimize_slopes(profiled, d, seed);
  const auto proj = project_error(err, DiscreteRv(residual_values(d, 0.0, best.slopes), p));
  auto r = finish(d, proj.statistic.mid(), best.slopes, d.regressors() <= 2 ? "nested_golden" : "subgradient");
  r.objective = err(r.residual_rv);
  r.gap = best.gap;
  r.non_unique = !proj.statistic.is_point();
  r.statistic_of_residual = proj.statistic - proj.statistic.mid();
  return r;
}

FitResult fit_catalog(const CatalogSpec& spec, const Dataset& d, std::uint64_t seed) {
  const Quartet q = make_catalog_quadrangle(spec);
  FitResult r;
  if (auto form = pl_form(spec))
    r = fit_pl(*form, d);
  else if (spec.family == Family::standard_mean)
    r = fit_least_squares(d);
  else if (spec.family == Family::expectile_mse)
    r = fit_expectile_mse(spec.q, d);
  else
    r = fit_linear(q.error_fn(), d, seed);
  r.objective = q.error(r.residual_rv);
  r.statistic_of_residual = q.statistic(r.residual_rv);
  return r;
}

NamedModel parse_named_model(const std::string& n) {
  if (n == "quantile") return NamedModel::quantile;
  if (n == "expectile_pl") return NamedModel::expectile_pl;
  if (n == "expectile_mse") return NamedModel::expectile_mse;
  if (n == "svr") return NamedModel::svr;
  if (n == "mean_pl") return NamedModel::mean_pl;
  if (n == "biased_mean") return NamedModel::biased_mean;
  throw ValidationError("unknown regression model '" + n + "'");
}

CatalogSpec to_catalog(const NamedSpec& s) {
  CatalogSpec c;
  switch (s.model) {
    case NamedModel::quantile: c.family = Family::quantile, c.alpha = s.param; break;
    case NamedModel::expectile_pl: c.family = Family::expectile_pl, c.k = s.param; break;
    case NamedModel::expectile_mse: c.family = Family::expectile_mse, c.q = s.param; break;
    case NamedModel::svr: c.family = Family::qsau, c.eps = s.param; break;
    case NamedModel::mean_pl: c.family = Family::mean_pl; break;
    case NamedModel::biased_mean: c.family = Family::biased_mean, c.x = s.param; break;
  }
  return c;
}

FitResult fit_named(const NamedSpec& s, const Dataset& d) { return fit_catalog(to_catalog(s), d); }

EquivalenceReport regression_equivalence_check(const Quartet& quartet, const FitResult& unconstrained,
                                               const Dataset& d) {
  d.validate();
  const auto p = d.probs();
  auto dev = [&](const std::vector<double>& slopes) {
    return quartet.deviation(DiscreteRv(residual_values(d, 0.0, slopes), p));
  };
  const auto best = minimize_slopes(dev, d, 0);
  const DiscreteRv z0(residual_values(d, 0.0, best.slopes), p);
  const double c0 = quartet.statistic(z0).mid();
  const DiscreteRv z = residuals(d, c0, best.slopes);
  EquivalenceReport r;
  r.error_objective = unconstrained.objective;
  r.deviation_objective = quartet.deviation(z);
  r.gap = std::abs(r.error_objective - r.deviation_objective);
  r.statistic_contains_zero = quartet.statistic(z).contains(0.0, 1e-7 * probe_scale(z));
  return r;
}

bool track_statistic(const FitResult& fit, const Quartet& quartet, double tol) {
  return quartet.statistic(fit.residual_rv).contains(0.0, tol);
}

SvcResult nu_svc(double alpha, const Dataset& d, std::uint64_t seed) {
  d.validate();
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("nu-SVC level alpha must lie in [0,1)");
  for (double y : d.target)
    if (y != 1.0 && y != -1.0) throw ValidationError("classification targets must be +1 or -1");
  const std::size_t n = d.rows(), m = d.regressors();
  const auto p = d.probs();
  double xmax = 1.0;
  for (const auto& row : d.features)
    for (double v : row) xmax = std::max(xmax, std::abs(v));
  const double box = 10.0 * (1.0 + xmax);

  auto losses = [&](const std::vector<double>& w, double w0) {
    std::vector<double> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = w0;
      for (std::size_t j = 0; j < m; ++j) s += w[j] * d.features[i][j];
      l[i] = -d.target[i] * s;
    }
    return l;
  };
  auto risk = [&](const std::vector<double>& w, double w0) {
    return cvar_direct(DiscreteRv(losses(w, w0), p), alpha);
  };
  // z = (w_1..w_m, w0, C)
  auto objective = [&](const std::vector<double>& z) {
    const std::vector<double> w(z.begin(), z.begin() + static_cast<long>(m));
    const auto l = losses(w, z[m]);
    if (alpha == 0.0) return std::inner_product(p.begin(), p.end(), l.begin(), 0.0);
    double s = z[m + 1];
    for (std::size_t i = 0; i < n; ++i) s += p[i] * pos(l[i] - z[m + 1]) / (1.0 - alpha);
    return s;
  };
  auto subgrad = [&](const std::vector<double>& z) {
    const std::vector<double> w(z.begin(), z.begin() + static_cast<long>(m));
    const auto l = losses(w, z[m]);
    std::vector<double> g(m + 2, 0.0);
    if (alpha != 0.0) g[m + 1] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool active = alpha == 0.0 || l[i] > z[m + 1];
      if (!active) continue;
      const double k = p[i] / (1.0 - alpha);
      for (std::size_t j = 0; j < m; ++j) g[j] -= k * d.target[i] * d.features[i][j];
      g[m] -= k * d.target[i];
      if (alpha != 0.0) g[m + 1] -= k;
    }
    return g;
  };
  auto project = [&](std::vector<double> z) {
    double nrm = 0.0;
    for (std::size_t j = 0; j < m; ++j) nrm += z[j] * z[j];
    nrm = std::sqrt(nrm);
    if (nrm > 1.0)
      for (std::size_t j = 0; j < m; ++j) z[j] /= nrm;
    z[m] = std::clamp(z[m], -box, box);
    z[m + 1] = std::clamp(z[m + 1], -box * (1.0 + xmax), box * (1.0 + xmax));
    return z;
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SubgradientResult best;
  for (int s = 0; s < 5; ++s) {
    std::vector<double> z0(m + 2, 0.0);
    if (s > 0)
      for (std::size_t j = 0; j < m; ++j) z0[j] = nd(rng);
    SubgradientOptions o;
    o.steps = 40000;
    o.step0 = 0.5;
    const auto r = minimize_subgradient(objective, subgrad, project, project(z0), o);
    if (r.value < best.value) best = r;
  }
  SvcResult out;
  out.direction.assign(best.x.begin(), best.x.begin() + static_cast<long>(m));
  // the intercept is refit exactly for the returned direction
  ScalarOptions so;
  so.expand = false;
  const auto w0 = minimize_scalar_convex([&](double c) { return risk(out.direction, c); }, -box, box, so);
  out.intercept = w0.argmin;
  out.objective = w0.value;
  out.gap = std::abs(best.value - out.objective);
  return out;
}

}  // namespace rq
