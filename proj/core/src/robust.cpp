#include "rq/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rq {

std::vector<double> ScenarioSet::weights() const {
  if (probs.empty()) return std::vector<double>(scenarios(), 1.0 / static_cast<double>(scenarios()));
  return probs;
}

void ScenarioSet::validate() const {
  if (returns.empty() || assets() == 0) throw ValidationError("scenario set is empty");
  for (const auto& r : returns)
    if (r.size() != assets()) throw ValidationError("scenario rows have different lengths");
  if (!probs.empty()) {
    if (probs.size() != returns.size()) throw ValidationError("scenario probabilities and rows differ");
    double s = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw ValidationError("scenario probabilities must be nonnegative");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw ValidationError("scenario probabilities must sum to 1");
  }
}

DiscreteRv ScenarioSet::loss(const std::vector<double>& w) const {
  std::vector<double> l(scenarios());
  for (std::size_t s = 0; s < scenarios(); ++s) {
    double v = 0.0;
    for (std::size_t j = 0; j < assets(); ++j) v += w[j] * returns[s][j];
    l[s] = -v;
  }
  return DiscreteRv(l, weights());
}

const char* to_string(PortfolioStatus s) { return s == PortfolioStatus::optimal ? "optimal" : "infeasible"; }

namespace {

std::vector<double> asset_means(const ScenarioSet& s) {
  const auto p = s.weights();
  std::vector<double> m(s.assets(), 0.0);
  for (std::size_t k = 0; k < s.scenarios(); ++k)
    for (std::size_t j = 0; j < s.assets(); ++j) m[j] += p[k] * s.returns[k][j];
  return m;
}

// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> v) {
  auto u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  for (auto& x : v) x = std::max(x - theta, 0.0);
  return v;
}

PortfolioResult infeasible() {
  PortfolioResult r;
  r.status = PortfolioStatus::infeasible;
  return r;
}

PortfolioResult minimize_portfolio(const std::function<double(const std::vector<double>&)>& obj, const ScenarioSet& s,
                                   std::optional<double> target) {
  s.validate();
  const std::size_t k = s.assets();
  const auto m = asset_means(s);
  const double mtol = 1e-9 * (1.0 + std::abs(target.value_or(0.0)));
  PortfolioResult r;
  ScalarOptions o;
  o.expand = false;
  if (k == 1) {
    if (target && std::abs(m[0] - *target) > mtol) return infeasible();
    r.weights = {1.0};
    r.risk = obj(r.weights);
    r.method = "single_asset";
    return r;
  }
  if (k == 2) {
    if (target) {
      if (std::abs(m[0] - m[1]) > 1e-12) {
        const double t = (*target - m[1]) / (m[0] - m[1]);
        if (t < -1e-12 || t > 1.0 + 1e-12) return infeasible();
        r.weights = {std::clamp(t, 0.0, 1.0), 1.0 - std::clamp(t, 0.0, 1.0)};
        r.risk = obj(r.weights);
        r.method = "target_fixed";
        return r;
      }
      if (std::abs(m[0] - *target) > mtol) return infeasible();
    }
    const auto best = minimize_scalar_convex([&](double t) { return obj({t, 1.0 - t}); }, 0.0, 1.0, o);
    r.weights = {best.argmin, 1.0 - best.argmin};
    r.risk = best.value;
    r.method = "golden";
    return r;
  }
  if (k == 3) {
    if (target) {
      // one weight is free; a pair with distinct means absorbs the target
      std::size_t fr = 3, a = 0, b = 0;
      for (std::size_t c = 0; c < 3 && fr == 3; ++c) {
        const std::size_t x = (c + 1) % 3, y = (c + 2) % 3;
        if (std::abs(m[x] - m[y]) > 1e-12) fr = c, a = x, b = y;
      }
      if (fr == 3) {
        if (std::abs(m[0] - *target) > mtol) return infeasible();
        target.reset();  // every portfolio meets the target
      } else {
        auto weights_of = [&, fr, a, b](double t) -> std::optional<std::vector<double>> {
          std::vector<double> w(3);
          w[fr] = t;
          w[a] = (*target - m[b] - t * (m[fr] - m[b])) / (m[a] - m[b]);
          w[b] = 1.0 - t - w[a];
          if (w[a] < -1e-12 || w[b] < -1e-12) return std::nullopt;
          for (auto& x : w) x = std::max(x, 0.0);
          return w;
        };
        const auto best = minimize_scalar_convex(
            [&](double t) {
              const auto w = weights_of(t);
              return w ? obj(*w) : kInf;
            },
            0.0, 1.0, o);
        if (!std::isfinite(best.value)) return infeasible();
        r.weights = *weights_of(best.argmin);
        r.risk = best.value;
        r.method = "golden_target";
        return r;
      }
    }
    auto f = [&](const std::vector<double>& t) {
      if (t[0] + t[1] > 1.0 + 1e-15) return kInf;
      return obj({t[0], t[1], std::max(1.0 - t[0] - t[1], 0.0)});
    };
    ScalarOptions no;
    no.grid = 33;
    const auto best = minimize_nested(f, {0.0, 0.0}, {1.0, 1.0}, no);
    r.weights = {best.x[0], best.x[1], std::max(1.0 - best.x[0] - best.x[1], 0.0)};
    r.risk = best.value;
    r.method = "nested_golden";
    return r;
  }
  if (target) throw ValidationError("a mean target is supported for up to three assets");
  auto grad = [&](const std::vector<double>& w) {
    std::vector<double> g(k);
    const double h = 1e-7;
    for (std::size_t j = 0; j < k; ++j) {
      auto up = w, dn = w;
      up[j] += h, dn[j] -= h;
      g[j] = (obj(up) - obj(dn)) / (2.0 * h);
    }
    return g;
  };
  SubgradientOptions so;
  so.steps = 20000;
  so.step0 = 0.1;
  const auto best = minimize_subgradient(obj, grad, project_simplex,
                                         std::vector<double>(k, 1.0 / static_cast<double>(k)), so);
  r.weights = best.x;
  r.risk = best.value;
  r.method = "subgradient";
  return r;
}

}  // namespace

PortfolioResult portfolio_optimize(const Functional& risk, const ScenarioSet& s, std::optional<double> target) {
  return minimize_portfolio([&](const std::vector<double>& w) { return risk(s.loss(w)); }, s, target);
}

PortfolioResult portfolio_cvar_lp(double alpha, const ScenarioSet& s, std::optional<double> target) {
  s.validate();
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("CVaR level alpha must lie in [0,1)");
  const std::size_t k = s.assets(), n = s.scenarios();
  const auto p = s.weights();
  // variables: w (k), C (free), u (n)
  const std::size_t nc = k, nu = k + 1, nvar = k + 1 + n;
  LpProblem lp;
  lp.c.assign(nvar, 0.0);
  lp.lower.assign(nvar, 0.0);
  lp.upper.assign(nvar, kInf);
  lp.lower[nc] = -kInf;
  lp.c[nc] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    lp.c[nu + i] = p[i] / (1.0 - alpha);
    std::vector<double> row(nvar, 0.0);
    for (std::size_t j = 0; j < k; ++j) row[j] = -s.returns[i][j];
    row[nc] = -1.0;
    row[nu + i] = -1.0;
    lp.a_le.push_back(row), lp.b_le.push_back(0.0);
  }
  std::vector<double> budget(nvar, 0.0);
  for (std::size_t j = 0; j < k; ++j) budget[j] = 1.0;
  lp.a_eq.push_back(budget), lp.b_eq.push_back(1.0);
  if (target) {
    const auto m = asset_means(s);
    std::vector<double> row(nvar, 0.0);
    for (std::size_t j = 0; j < k; ++j) row[j] = m[j];
    lp.a_eq.push_back(row), lp.b_eq.push_back(*target);
  }
  const auto sol = solve_lp(lp);
  if (sol.status == LpStatus::infeasible) return infeasible();
  if (sol.status != LpStatus::optimal) throw ConvergenceError("CVaR portfolio LP is unbounded");
  PortfolioResult r;
  r.weights.assign(sol.x.begin(), sol.x.begin() + static_cast<long>(k));
  r.risk = cvar_direct(s.loss(r.weights), alpha);
  r.method = "lp";
  return r;
}

DroResult dro_solve(const DroProblem& p) {
  if (!(p.tau > 0.0)) throw ValidationError("ball radius tau must be positive");
  const auto regret_form = [&](const DiscreteRv& l) {
    return regret_to_risk_value([&](const DiscreteRv& y) { return phi_regret(p.phi, p.tau, y).value; }, l);
  };
  const auto pr = minimize_portfolio([&](const std::vector<double>& w) { return regret_form(p.scenarios.loss(w)); },
                                     p.scenarios, p.target_mean);
  DroResult r;
  r.status = pr.status;
  if (pr.status != PortfolioStatus::optimal) return r;
  r.weights = pr.weights;
  const DiscreteRv loss = p.scenarios.loss(r.weights);
  r.value = regret_form(loss);
  const auto env = family_eval_envelope(p.phi, p.tau, loss);
  r.envelope_value = env.value;
  // densities are per distinct loss value; spread them back over scenarios
  const auto vals = loss.values();
  for (std::size_t s = 0; s < p.scenarios.scenarios(); ++s) {
    double l = 0.0;
    for (std::size_t j = 0; j < p.scenarios.assets(); ++j) l -= r.weights[j] * p.scenarios.returns[s][j];
    const auto it = std::lower_bound(vals.begin(), vals.end(), l);
    const std::size_t idx = it == vals.end() ? vals.size() - 1 : static_cast<std::size_t>(it - vals.begin());
    r.worst_case_density.push_back(env.density[idx]);
  }
  r.approximate_density = std::abs(r.envelope_value - r.value) > 1e-6 * (1.0 + std::abs(r.value));
  return r;
}

EpiKernel quadratic_kernel(double c) {
  if (!(c > 0.0)) throw ValidationError("quadratic kernel weight must be positive");
  return {"quadratic",
          [c](const DiscreteRv& x) { return x.expect([c](double t) { return t + 0.5 * c * t * t; }); },
          [c](const std::vector<double>& q, const std::vector<double>& p) {
            double s = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) s += p[i] * (q[i] - 1.0) * (q[i] - 1.0);
            return s / (2.0 * c);
          }};
}

EpiKernel l2_kernel(double c) {
  if (!(c > 0.0)) throw ValidationError("L2 kernel weight must be positive");
  return {"l2", [c](const DiscreteRv& x) { return expectation(x) + c * p_norm(x, 2.0); },
          [c](const std::vector<double>& q, const std::vector<double>& p) {
            double s = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) s += p[i] * (q[i] - 1.0) * (q[i] - 1.0);
            return std::sqrt(s) <= c * (1.0 + 1e-12) ? 0.0 : kInf;
          }};
}

EpiKernel kl_kernel() {
  const auto phi = phi_kl();
  return {"kl", [](const DiscreteRv& x) { return x.expect([](double t) { return std::expm1(t); }); },
          [phi](const std::vector<double>& q, const std::vector<double>& p) { return divergence_value(phi, q, p); }};
}

EpiSpec cvar_epi_spec(double alpha, EpiKernel kernel, double epsilon) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("CVaR level alpha must lie in [0,1)");
  EpiSpec s;
  s.base = [alpha](const DiscreteRv& x) { return cvar_direct(x, alpha); };
  s.kernel = std::move(kernel);
  s.epsilon = epsilon;
  s.dual_box = std::make_pair(0.0, 1.0 / (1.0 - alpha));
  return s;
}

namespace {

void check_epsilon(double e) {
  if (!(e > 0.0) || !std::isfinite(e)) throw ValidationError("epi-regularization epsilon must be positive");
}

double infimal_convolution(const EpiSpec& spec, const DiscreteRv& x) {
  check_epsilon(spec.epsilon);
  const std::size_t n = x.size();
  const auto v = x.values(), p = x.probs();
  const double eps = spec.epsilon;
  auto f = [&](const std::vector<double>& y) {
    std::vector<double> shifted(n), scaled(n);
    for (std::size_t i = 0; i < n; ++i) shifted[i] = v[i] - y[i], scaled[i] = eps * y[i];
    return spec.base(DiscreteRv(shifted, p)) + spec.kernel.regret(DiscreteRv(scaled, p)) / eps;
  };
  const double at_zero = f(std::vector<double>(n, 0.0));
  double best = at_zero;
  double box = 2.0 * (std::max(std::abs(x.min()), std::abs(x.max())) + 1.0);
  if (n <= 3) {
    ScalarOptions o;
    o.grid = n == 1 ? 65 : 17;
    for (int attempt = 0; attempt < 6; ++attempt) {
      const auto m = minimize_nested(f, std::vector<double>(n, -box), std::vector<double>(n, box), o);
      best = std::min(best, m.value);
      bool edge = false;
      for (double yi : m.x) edge = edge || std::abs(std::abs(yi) - box) < 1e-6 * box;
      if (!edge) break;
      box *= 4.0;
    }
  } else {
    auto grad = [&](const std::vector<double>& y) {
      std::vector<double> g(n);
      const double h = 1e-7 * box;
      for (std::size_t i = 0; i < n; ++i) {
        auto up = y, dn = y;
        up[i] += h, dn[i] -= h;
        g[i] = (f(up) - f(dn)) / (2.0 * h);
      }
      return g;
    };
    auto clampv = [box](std::vector<double> y) {
      for (auto& t : y) t = std::clamp(t, -box, box);
      return y;
    };
    SubgradientOptions o;
    o.steps = 20000;
    o.step0 = 0.1 * box;
    best = std::min(best, minimize_subgradient(f, grad, clampv, std::vector<double>(n, 0.0), o).value);
  }
  // the exact value never drops below E[X]; this removes rounding noise at the floor
  return std::max(best, expectation(x));
}

}  // namespace

double epi_risk_primal(const EpiSpec& spec, const DiscreteRv& x) { return infimal_convolution(spec, x); }

double epi_regret(const EpiSpec& spec, const DiscreteRv& x) { return infimal_convolution(spec, x); }

double epi_risk_dual(const EpiSpec& spec, const DiscreteRv& x) {
  check_epsilon(spec.epsilon);
  if (!spec.dual_box) throw ValidationError("the dual route needs the base risk's dual box");
  const std::size_t n = x.size();
  if (n > 4) throw ValidationError("the dual route supports up to four atoms");
  const auto v = x.values(), p = x.probs();
  const double lo = spec.dual_box->first;
  double hi = spec.dual_box->second;
  double pmin = *std::min_element(p.begin(), p.end());
  hi = std::min(hi, 1.0 / pmin);  // E[Q] = 1 with Q >= lo >= 0 caps every entry
  if (n == 1) return v[0] - spec.kernel.conj({1.0}, p) / spec.epsilon;
  // free entries Q_1..Q_{n-1}; the last one closes E[Q] = 1
  auto neg = [&](const std::vector<double>& t) {
    std::vector<double> q(t.begin(), t.end());
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) mass += p[i] * q[i];
    q.push_back((1.0 - mass) / p[n - 1]);
    if (q.back() < lo - 1e-15 || q.back() > spec.dual_box->second + 1e-15) return kInf;
    double val = 0.0;
    for (std::size_t i = 0; i < n; ++i) val += p[i] * q[i] * v[i];
    const double pen = spec.kernel.conj(q, p);
    if (!std::isfinite(pen)) return kInf;
    return -(val - pen / spec.epsilon);
  };
  ScalarOptions o;
  o.grid = n == 2 ? 65 : 33;
  const auto m = minimize_nested(neg, std::vector<double>(n - 1, lo), std::vector<double>(n - 1, hi), o);
  return -m.value;
}

double epi_regret_divroot(double lo, double hi, const DivergenceFn& phi, double epsilon, const DiscreteRv& x) {
  check_epsilon(epsilon);
  if (!(lo <= 1.0 && 1.0 <= hi)) throw ValidationError("the base regret dual box must contain 1");
  if (lo < phi.dom_lo || hi > phi.dom_hi)
    throw ValidationError("base regret dual domain leaves the closure of the divergence root's domain");
  if (!std::isfinite(hi)) throw ValidationError("the base regret dual box must be bounded");
  double total = 0.0;
  ScalarOptions o;
  o.expand = false;
  for (const auto& a : x.atoms()) {
    const auto m = minimize_scalar_convex([&](double q) { return phi.phi(q) / epsilon - q * a.value; }, lo, hi, o);
    const double edge = std::min(phi.phi(lo) / epsilon - lo * a.value, phi.phi(hi) / epsilon - hi * a.value);
    total += a.prob * -std::min(m.value, edge);
  }
  return total;
}

}  // namespace rq
