#include "rq/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rq/catalog.hpp"

namespace rq {

namespace {

double pos(double t) { return t > 0.0 ? t : 0.0; }

double log_sum_exp_mean(const DiscreteRv& x, double scale) {
  // ln E[exp(X / scale)]
  const double m = x.max();
  double w = 0.0;
  for (const auto& a : x.atoms()) w += a.prob * std::exp((a.value - m) / scale);
  return m / scale + std::log(w);
}

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("divergence radius beta must be positive and finite");
}

}  // namespace

DivergenceFn phi_kl() {
  DivergenceFn f;
  f.name = "kl";
  f.phi = [](double x) {
    if (x < 0.0) return kInf;
    if (x == 0.0) return 1.0;
    return x * std::log(x) - x + 1.0;
  };
  f.phi_conj = [](double z) { return std::expm1(z); };
  f.conj_grad = [](double z) { return std::exp(z); };
  return f;
}

DivergenceFn phi_tv() {
  DivergenceFn f;
  f.name = "tv";
  f.phi = [](double x) { return x < 0.0 ? kInf : std::abs(x - 1.0); };
  f.phi_conj = [](double z) { return z > 1.0 ? kInf : -1.0 + pos(z + 1.0); };
  return f;
}

DivergenceFn phi_pearson() {
  DivergenceFn f;
  f.name = "pearson";
  f.phi = [](double x) { return x < 0.0 ? kInf : (x - 1.0) * (x - 1.0); };
  f.phi_conj = [](double z) { return z + 2.0 >= 0.0 ? (z + 2.0) * (z + 2.0) / 4.0 - 1.0 : -1.0; };
  f.conj_grad = [](double z) { return pos((z + 2.0) / 2.0); };
  return f;
}

DivergenceFn phi_extended_pearson() {
  DivergenceFn f;
  f.name = "extended_pearson";
  f.phi = [](double x) { return (x - 1.0) * (x - 1.0); };
  f.phi_conj = [](double z) { return z * z / 4.0 + z; };
  f.conj_grad = [](double z) { return z / 2.0 + 1.0; };
  f.dom_lo = -kInf;
  f.kind = DivergenceFn::Kind::extended;
  return f;
}

// Weights placed so that the statistic is the q-expectile: curvature 1/q above 1.
DivergenceFn phi_gen_extended_pearson(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("gen_extended_pearson level q must lie in (0,1)");
  DivergenceFn f;
  f.name = "gen_extended_pearson";
  f.q = q;
  f.phi = [q](double x) { return x > 1.0 ? (x - 1.0) * (x - 1.0) / q : (x - 1.0) * (x - 1.0) / (1.0 - q); };
  f.phi_conj = [q](double z) { return z > 0.0 ? q * z * z / 4.0 + z : (1.0 - q) * z * z / 4.0 + z; };
  f.conj_grad = [q](double z) { return z > 0.0 ? q * z / 2.0 + 1.0 : (1.0 - q) * z / 2.0 + 1.0; };
  f.dom_lo = -kInf;
  f.kind = DivergenceFn::Kind::extended;
  return f;
}

const std::vector<std::string>& phi_names() {
  static const std::vector<std::string> n{"kl", "tv", "pearson", "extended_pearson", "gen_extended_pearson"};
  return n;
}

DivergenceFn make_phi(const std::string& name, double q) {
  if (name == "kl") return phi_kl();
  if (name == "tv") return phi_tv();
  if (name == "pearson") return phi_pearson();
  if (name == "extended_pearson") return phi_extended_pearson();
  if (name == "gen_extended_pearson") return phi_gen_extended_pearson(q);
  throw ValidationError("unknown divergence '" + name + "'");
}

double conjugate_gap(const DivergenceFn& phi) {
  const double lo = std::max(phi.dom_lo, -60.0), hi = std::min(phi.dom_hi, 60.0);
  double gap = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double z = -3.0 + 3.9 * i / 40.0;
    const double c = phi.phi_conj(z);
    if (!std::isfinite(c)) continue;
    ScalarOptions o;
    o.expand = false;
    const auto m = minimize_scalar_convex([&](double x) { return phi.phi(x) - z * x; }, lo, hi, o);
    gap = std::max(gap, std::abs(c + m.value));
  }
  return gap;
}

StochasticDivergenceJ expected_phi(const DivergenceFn& phi, bool normalized) {
  StochasticDivergenceJ j;
  j.label = "E[phi(Q)] (" + phi.name + (normalized ? ", E[Q]=1)" : ")");
  j.eval = [phi, normalized](const std::vector<double>& q, const std::vector<double>& p) {
    if (normalized) {
      double m = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) m += p[i] * q[i];
      if (std::abs(m - 1.0) > 1e-9) return kInf;
    }
    return divergence_value(phi, q, p);
  };
  return j;
}

double divergence_value(const DivergenceFn& phi, const std::vector<double>& q, const std::vector<double>& probs) {
  if (q.size() != probs.size()) throw ValidationError("density vector and atom count differ");
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (probs[i] == 0.0) continue;
    const double v = phi.phi(q[i]);
    if (!std::isfinite(v)) return kInf;
    s += probs[i] * v;
  }
  return s;
}

double divergence_value(const StochasticDivergenceJ& j, const std::vector<double>& q,
                        const std::vector<double>& probs) {
  if (q.size() != probs.size()) throw ValidationError("density vector and atom count differ");
  return j.eval(q, probs);
}

PerspectiveResult family_eval_perspective(const Functional& parent, double tau, const DiscreteRv& x) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("family parameter tau must be positive and finite");
  const double s = probe_scale(x);
  const double t_lo = std::log(1e-8 * s), t_hi = std::log(1e8 * s);
  auto g = [&](double t) {
    const double lam = std::exp(t);
    return lam * (parent(x.scale(1.0 / lam)) + tau);
  };
  ScalarOptions o;
  o.expand = false;
  const auto m = minimize_scalar_convex(g, t_lo, t_hi, o);
  PerspectiveResult r{m.value, std::exp(m.argmin), m.at_edge};
  if (m.at_edge && m.argmin <= t_lo + 1e-9) r.value = r.lambda * parent(x.scale(1.0 / r.lambda));
  return r;
}

EnvelopeResult family_eval_envelope(const DivergenceFn& phi, double tau, const DiscreteRv& x) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("family parameter tau must be positive and finite");
  const std::size_t n = x.size();
  const auto p = x.probs();
  const auto v = x.values();
  auto mean_qx = [&](const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i] * q[i] * v[i];
    return s;
  };
  if (n == 1) return {v[0], {1.0}};

  if (!phi.conj_grad) {
    if (phi.name != "tv") throw ValidationError("envelope evaluation needs a strictly convex phi or total variation");
    // variables Q (n) then t (n) with t >= |Q - 1|
    LpProblem lp;
    lp.c.assign(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) lp.c[i] = -p[i] * v[i];
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> up(2 * n, 0.0), dn(2 * n, 0.0);
      up[i] = 1.0, up[n + i] = -1.0;
      dn[i] = -1.0, dn[n + i] = -1.0;
      lp.a_le.push_back(up), lp.b_le.push_back(1.0);
      lp.a_le.push_back(dn), lp.b_le.push_back(-1.0);
    }
    std::vector<double> budget(2 * n, 0.0), mass(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) budget[n + i] = p[i], mass[i] = p[i];
    lp.a_le.push_back(budget), lp.b_le.push_back(tau);
    lp.a_eq.push_back(mass), lp.b_eq.push_back(1.0);
    const auto sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) throw ConvergenceError("total variation envelope LP not optimal");
    return {-sol.objective, std::vector<double>(sol.x.begin(), sol.x.begin() + static_cast<long>(n))};
  }

  if (phi.kind == DivergenceFn::Kind::divergence) {
    // all mass on the top atom once the budget allows it
    std::vector<double> top(n, 0.0);
    top[n - 1] = 1.0 / p[n - 1];
    if (divergence_value(phi, top, p) <= tau) return {v[n - 1], top};
  }

  auto density = [&](double mu) {
    auto mass_at = [&](double c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += p[i] * phi.conj_grad((v[i] - c) / mu);
      return s - 1.0;
    };
    // E[Q] >= 1 at C = min X and <= 1 at C = max X since (phi*)'(0) = 1
    const double c = last_nonnegative(mass_at, v.front(), v.back());
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = phi.conj_grad((v[i] - c) / mu);
    return q;
  };
  auto spent = [&](double t) {
    const auto q = density(std::exp(t));
    for (double qi : q)
      if (!std::isfinite(qi)) return kInf;
    return divergence_value(phi, q, p) - tau;
  };
  const double s = probe_scale(x);
  const double t = last_nonnegative(spent, std::log(1e-12 * s), std::log(1e12 * s));
  auto q = density(std::exp(t));
  return {mean_qx(q), std::move(q)};
}

Functional phi_parent_risk(const DivergenceFn& phi) {
  if (phi.name == "kl") return [](const DiscreteRv& x) { return log_sum_exp_mean(x, 1.0); };
  if (phi.name == "tv")
    return [](const DiscreteRv& x) {
      const double floor = x.max() - 2.0;
      return x.expect([floor](double t) { return std::max(t, floor); });
    };
  return [phi](const DiscreteRv& x) {
    return regret_to_risk_value([phi](const DiscreteRv& y) { return y.expect(phi.phi_conj); }, x);
  };
}

PerspectiveResult phi_regret(const DivergenceFn& phi, double beta, const DiscreteRv& x) {
  check_beta(beta);
  return family_eval_perspective([&phi](const DiscreteRv& y) { return y.expect(phi.phi_conj); }, beta, x);
}

Quartet make_divergence_quadrangle_generic(const DivergenceFn& phi, double beta) {
  check_beta(beta);
  Quartet q;
  q.label = phi.name + " divergence (generic)";
  auto regret = [phi, beta](const DiscreteRv& x) { return phi_regret(phi, beta, x).value; };
  RegretFn v{regret, {}, q.label, std::nullopt};
  q.regret = regret;
  q.error = [regret](const DiscreteRv& x) { return regret(x) - expectation(x); };
  q.risk = [v](const DiscreteRv& x) { return regret_to_risk_value(v.eval, x); };
  q.deviation = [v](const DiscreteRv& x) { return regret_to_risk_value(v.eval, x) - expectation(x); };
  q.statistic = [v](const DiscreteRv& x) { return regret_to_risk(v, x).statistic; };
  q.flags.positively_homogeneous = true;
  q.flags.monotone = phi.kind == DivergenceFn::Kind::divergence;
  q.flags.coherent = q.flags.monotone;
  return q;
}

double evar_stationarity(const DiscreteRv& x, double beta, double lambda) {
  const double m = x.max();
  double w = 0.0, wx = 0.0;
  for (const auto& a : x.atoms()) {
    const double e = a.prob * std::exp((a.value - m) / lambda);
    w += e;
    wx += e * (a.value - m);
  }
  return lambda * (beta + std::log(w)) - wx / w;
}

EvarResult evar(const DiscreteRv& x, double beta) {
  check_beta(beta);
  if (x.is_constant()) return {x.value(0), 0.0, x.value(0)};
  const double m = x.max();
  const double p_top = x.prob(x.size() - 1);
  // derivative in lambda tends to beta + ln p_top as lambda -> 0
  if (beta + std::log(p_top) >= 0.0) return {m, 0.0, m};
  const double s = probe_scale(x);
  auto slope = [&](double t) { return -evar_stationarity(x, beta, std::exp(t)); };
  double hi = std::log(s);
  while (slope(hi) >= 0.0) hi += 2.0;
  const double t = last_nonnegative(slope, std::log(1e-12 * s), hi);
  const double lam = std::exp(t);
  const double stat = log_sum_exp_mean(x, lam) * lam;
  return {lam * beta + stat, lam, stat};
}

namespace {

double tv_regret(const DiscreteRv& x, double beta) {
  const double lower = std::max(x.max(), 0.0);
  auto f = [&](double lam) {
    return lam * (beta - 1.0) + x.expect([lam](double t) { return pos(t + lam); });
  };
  double best = f(lower);
  for (const auto& a : x.atoms())
    if (-a.value > lower) best = std::min(best, f(-a.value));
  return best;
}

}  // namespace

Quartet make_divergence_quadrangle(const DivergenceFn& phi, double beta) {
  check_beta(beta);
  Quartet q;
  q.label = phi.name + " divergence";
  Flags& f = q.flags;
  f.positively_homogeneous = true;
  if (phi.name == "kl") {
    q.risk = [beta](const DiscreteRv& x) { return evar(x, beta).value; };
    q.deviation = [beta](const DiscreteRv& x) { return evar(x, beta).value - expectation(x); };
    q.statistic = [beta](const DiscreteRv& x) { return StatInterval::point(evar(x, beta).statistic); };
    q.regret = [phi, beta](const DiscreteRv& x) { return phi_regret(phi, beta, x).value; };
    q.error = [phi, beta](const DiscreteRv& x) { return phi_regret(phi, beta, x).value - expectation(x); };
    f.monotone = true;
  } else if (phi.name == "tv") {
    auto risk = [beta](const DiscreteRv& x) {
      if (beta >= 2.0) return x.max();
      return beta / 2.0 * x.max() + (1.0 - beta / 2.0) * cvar_direct(x, beta / 2.0);
    };
    q.risk = risk;
    q.deviation = [risk](const DiscreteRv& x) { return risk(x) - expectation(x); };
    q.statistic = [beta](const DiscreteRv& x) {
      if (beta >= 2.0) return StatInterval::point(x.max());
      return (quantile_interval(x, beta / 2.0) + x.max()) * 0.5;
    };
    q.regret = [beta](const DiscreteRv& x) { return tv_regret(x, beta); };
    q.error = [beta](const DiscreteRv& x) { return tv_regret(x, beta) - expectation(x); };
    f.monotone = true;
  } else if (phi.name == "pearson") {
    auto regret = [beta](const DiscreteRv& x) {
      return std::sqrt((beta + 1.0) * x.expect([](double t) { return pos(t) * pos(t); }));
    };
    RegretFn v{regret, {}, q.label, std::nullopt};
    q.regret = regret;
    q.error = [regret](const DiscreteRv& x) { return regret(x) - expectation(x); };
    q.risk = [v](const DiscreteRv& x) { return regret_to_risk_value(v.eval, x); };
    q.deviation = [v](const DiscreteRv& x) { return regret_to_risk_value(v.eval, x) - expectation(x); };
    q.statistic = [v](const DiscreteRv& x) { return regret_to_risk(v, x).statistic; };
    f.monotone = true;
  } else if (phi.name == "extended_pearson") {
    q.statistic = [](const DiscreteRv& x) { return StatInterval::point(expectation(x)); };
    q.risk = [beta](const DiscreteRv& x) { return expectation(x) + std::sqrt(beta * variance(x)); };
    q.deviation = [beta](const DiscreteRv& x) { return std::sqrt(beta * variance(x)); };
    q.regret = [beta](const DiscreteRv& x) { return expectation(x) + std::sqrt(beta) * p_norm(x, 2.0); };
    q.error = [beta](const DiscreteRv& x) { return std::sqrt(beta) * p_norm(x, 2.0); };
  } else if (phi.name == "gen_extended_pearson") {
    const double lv = phi.q;
    auto err = [beta, lv](const DiscreteRv& x) {
      return std::sqrt(beta * x.expect([lv](double t) { return t > 0.0 ? lv * t * t : (1.0 - lv) * t * t; }));
    };
    q.statistic = [lv](const DiscreteRv& x) { return StatInterval::point(expectile_value(x, lv)); };
    q.deviation = [err, lv](const DiscreteRv& x) { return err(x.shift(-expectile_value(x, lv))); };
    q.risk = [err, lv](const DiscreteRv& x) { return err(x.shift(-expectile_value(x, lv))) + expectation(x); };
    q.error = err;
    q.regret = [err](const DiscreteRv& x) { return err(x) + expectation(x); };
  } else {
    return make_divergence_quadrangle_generic(phi, beta);
  }
  f.coherent = f.monotone && f.positively_homogeneous;
  return q;
}

double cvar_indicator_regret(const DiscreteRv& x) {
  return x.expect([](double t) { return pos(t + 1.0); }) <= 1.0 + 1e-12 ? 0.0 : kInf;
}

double cvar_indicator_family(const DiscreteRv& x, double tau) {
  if (!(tau > 0.0)) throw ValidationError("family parameter tau must be positive");
  if (x.max() <= 0.0) return 0.0;
  if (expectation(x) > 0.0) return kInf;
  // E[X + lambda]+ - lambda is nonincreasing and equals E[X] <= 0 once lambda >= -min X
  auto excess = [&](double lam) { return x.expect([lam](double t) { return pos(t + lam); }) - lam; };
  const double hi = std::max(-x.min(), 0.0) + 1.0;
  return tau * last_nonnegative(excess, 0.0, hi);
}

ClassificationReport classify_divergence(const StochasticDivergenceJ& j, std::size_t atoms, int samples,
                                         std::uint64_t seed) {
  if (atoms < 2) throw ValidationError("classification needs at least two atoms");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p(atoms);
  for (auto& pi : p) pi = 0.2 + unit(rng);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& pi : p) pi /= total;

  auto normalize = [&](std::vector<double> q) {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) m += p[i] * q[i];
    for (auto& qi : q) qi /= m;
    return q;
  };
  auto random_density = [&]() {
    std::vector<double> q(atoms);
    for (auto& qi : q) qi = 0.05 + 2.0 * unit(rng);
    return q;
  };

  ClassificationReport r;
  const std::vector<double> ones(atoms, 1.0);
  r.normalized = std::abs(j.eval(ones, p)) <= 1e-12;
  r.nonnegative = r.unique_min = r.root_domain = r.stochastic_domain = true;
  for (int s = 0; s < samples; ++s) {
    const auto raw = random_density();
    const auto dens = normalize(raw);
    const double v_raw = j.eval(raw, p), v_dens = j.eval(dens, p);
    if (v_raw < -1e-12 || v_dens < -1e-12) r.nonnegative = false;

    // zero-mean perturbation keeps E[Q] = 1
    std::vector<double> d(atoms);
    double md = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) d[i] = unit(rng) - 0.5, md += p[i] * d[i];
    for (auto& di : d) di -= md;
    const double step = s % 2 == 0 ? 1e-2 : 1e-1;
    std::vector<double> pert(atoms);
    for (std::size_t i = 0; i < atoms; ++i) pert[i] = 1.0 + step * d[i];
    if (!(j.eval(pert, p) > 0.0)) r.unique_min = false;

    auto neg = dens;
    neg[s % atoms] = -0.1 - unit(rng);
    const bool neg_inf = !std::isfinite(j.eval(neg, p));
    const bool raw_finite = std::isfinite(v_raw);
    const bool off_mass = std::abs(std::inner_product(p.begin(), p.end(), raw.begin(), 0.0) - 1.0) > 1e-6;
    if (!neg_inf || !raw_finite) r.root_domain = false;
    if (!neg_inf || !std::isfinite(v_dens) || (off_mass && raw_finite)) r.stochastic_domain = false;
  }
  using K = StochasticDivergenceJ::Kind;
  if (r.normalized && r.nonnegative && r.unique_min) {
    if (r.stochastic_domain)
      r.kind = K::stochastic_divergence;
    else if (r.root_domain)
      r.kind = K::divergence_root;
  }
  return r;
}

const char* to_string(StochasticDivergenceJ::Kind k) {
  switch (k) {
    case StochasticDivergenceJ::Kind::divergence_root: return "divergence_root";
    case StochasticDivergenceJ::Kind::stochastic_divergence: return "stochastic_divergence";
    case StochasticDivergenceJ::Kind::general: return "general";
  }
  return "general";
}

}  // namespace rq
