#include "rq/dual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rq {

const char* to_string(FunctionalKind k) {
  switch (k) {
    case FunctionalKind::error: return "error";
    case FunctionalKind::regret: return "regret";
    case FunctionalKind::deviation: return "deviation";
    case FunctionalKind::risk: return "risk";
  }
  return "unknown";
}

namespace {

double dot_p(const std::vector<double>& p, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * a[i] * b[i];
  return s;
}

double mean_p(const std::vector<double>& p, const std::vector<double>& a) {
  return std::inner_product(p.begin(), p.end(), a.begin(), 0.0);
}

// Polyhedral builder over n density entries plus aux variables.
struct Poly {
  Envelope env;
  explicit Poly(const std::vector<double>& p, std::size_t aux, std::string label) {
    env.label = std::move(label);
    env.probs = p;
    env.aux = aux;
    env.lower.assign(p.size() + aux, -kInf);
    env.upper.assign(p.size() + aux, kInf);
  }
  std::size_t n() const { return env.probs.size(); }
  std::vector<double> row() const { return std::vector<double>(n() + env.aux, 0.0); }
  void eq(std::vector<double> r, double b) { env.a_eq.push_back(std::move(r)), env.b_eq.push_back(b); }
  void le(std::vector<double> r, double b) { env.a_le.push_back(std::move(r)), env.b_le.push_back(b); }
  void bounds(std::size_t from, std::size_t count, double lo, double hi) {
    for (std::size_t i = from; i < from + count; ++i) env.lower[i] = lo, env.upper[i] = hi;
  }
  // sum_i p_i v_{from + i} = b
  void mass(std::size_t from, double b) {
    auto r = row();
    for (std::size_t i = 0; i < n(); ++i) r[from + i] = env.probs[i];
    eq(std::move(r), b);
  }
};

// {0 <= Q <= 1/(1-alpha), E[Q] = 1}
Envelope cvar_envelope(const std::vector<double>& p, double alpha) {
  Poly b(p, 0, "CVaR envelope");
  b.bounds(0, p.size(), 0.0, 1.0 / (1.0 - alpha));
  b.mass(0, 1.0);
  return b.env;
}

// box {lo <= Q <= hi} without a mass constraint
Envelope box_envelope(const std::vector<double>& p, double lo, double hi, std::string label) {
  Poly b(p, 0, std::move(label));
  b.bounds(0, p.size(), lo, hi);
  return b.env;
}

// Q = a Q1 + b Q2, each Q_k in a CVaR envelope
Envelope qsa_risk_envelope(const std::vector<double>& p, double alpha) {
  const std::size_t n = p.size();
  Poly b(p, 2 * n, "symmetric CVaR envelope");
  const double wl = 0.5 * (1.0 + alpha), wu = 0.5 * (1.0 - alpha);
  const double lvl = 0.5 * (1.0 - alpha), uvl = 0.5 * (1.0 + alpha);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = b.row();
    r[i] = 1.0, r[n + i] = -wl, r[2 * n + i] = -wu;
    b.eq(std::move(r), 0.0);
  }
  b.bounds(n, n, 0.0, 1.0 / (1.0 - lvl));
  b.bounds(2 * n, n, 0.0, 1.0 / (1.0 - uvl));
  b.mass(n, 1.0);
  b.mass(2 * n, 1.0);
  return b.env;
}

// |Q| <= Z, 0 <= Z <= 1, E[Z] = 1 - alpha: error (1-alpha) CVaR_alpha(|X|)
Envelope qsa_error_envelope(const std::vector<double>& p, double alpha) {
  const std::size_t n = p.size();
  Poly b(p, n, "absolute CVaR envelope");
  for (std::size_t i = 0; i < n; ++i) {
    auto up = b.row(), dn = b.row();
    up[i] = 1.0, up[n + i] = -1.0;
    dn[i] = -1.0, dn[n + i] = -1.0;
    b.le(std::move(up), 0.0);
    b.le(std::move(dn), 0.0);
  }
  b.bounds(n, n, 0.0, 1.0);
  b.mass(n, 1.0 - alpha);
  return b.env;
}

// Q = 1 + Z - E[Z], 0 <= Z <= 1
Envelope mean_pl_risk_envelope(const std::vector<double>& p) {
  const std::size_t n = p.size();
  Poly b(p, n, "mean absolute envelope");
  for (std::size_t i = 0; i < n; ++i) {
    auto r = b.row();
    r[i] = 1.0;
    for (std::size_t j = 0; j < n; ++j) r[n + j] += p[j];
    r[n + i] -= 1.0;
    b.eq(std::move(r), 1.0);
  }
  b.bounds(n, n, 0.0, 1.0);
  return b.env;
}

// convex hull of the boxes [0,1] and [-1,0]: Q = U + W, 0 <= U <= theta, theta - 1 <= W <= 0
Envelope mean_pl_error_envelope(const std::vector<double>& p) {
  const std::size_t n = p.size();
  Poly b(p, 2 * n + 1, "two-box hull envelope");
  const std::size_t th = 3 * n;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = b.row();
    r[i] = 1.0, r[n + i] = -1.0, r[2 * n + i] = -1.0;
    b.eq(std::move(r), 0.0);
    auto u = b.row();
    u[n + i] = 1.0, u[th] = -1.0;
    b.le(std::move(u), 0.0);
    auto w = b.row();
    w[2 * n + i] = -1.0, w[th] = 1.0;
    b.le(std::move(w), 1.0);
  }
  b.bounds(n, n, 0.0, 1.0);
  b.bounds(2 * n, n, -1.0, 0.0);
  b.bounds(th, 1, 0.0, 1.0);
  return b.env;
}

// {Q >= 0, E[Q] = 1, m <= Q <= r m}
Envelope expectile_risk_envelope(const std::vector<double>& p, double q) {
  const std::size_t n = p.size();
  const double ratio = q / (1.0 - q);
  Poly b(p, 1, "expectile envelope");
  for (std::size_t i = 0; i < n; ++i) {
    auto lo = b.row(), hi = b.row();
    lo[i] = -1.0, lo[n] = 1.0;
    hi[i] = 1.0, hi[n] = -ratio;
    b.le(std::move(lo), 0.0);
    b.le(std::move(hi), 0.0);
  }
  b.bounds(0, n, 0.0, kInf);
  b.bounds(n, 1, 0.0, kInf);
  b.mass(0, 1.0);
  return b.env;
}

// hull of {-1} and [0, 1/K]: Q = U - (1 - theta), 0 <= U <= theta / K
Envelope expectile_error_envelope(const std::vector<double>& p, double k) {
  const std::size_t n = p.size();
  Poly b(p, n + 1, "expectile error envelope");
  for (std::size_t i = 0; i < n; ++i) {
    auto r = b.row();
    r[i] = 1.0, r[n + i] = -1.0, r[2 * n] = -1.0;
    b.eq(std::move(r), -1.0);
    auto u = b.row();
    u[n + i] = 1.0, u[2 * n] = -1.0 / k;
    b.le(std::move(u), 0.0);
  }
  b.bounds(n, n, 0.0, kInf);
  b.bounds(2 * n, 1, 0.0, 1.0);
  return b.env;
}

// {Q : E[Q - c] = 0 if centered, ||Q - c||_2 <= lam}
Envelope ball_envelope(const std::vector<double>& p, double c, double lam, bool centered, std::string label) {
  Envelope e;
  e.form = Envelope::Form::oracle;
  e.label = std::move(label);
  e.probs = p;
  e.contains_fn = [p, c, lam, centered](const std::vector<double>& q, double tol) {
    double m = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) m += p[i] * (q[i] - c), ss += p[i] * (q[i] - c) * (q[i] - c);
    if (centered && std::abs(m) > tol) return false;
    return std::sqrt(ss) <= lam + tol;
  };
  e.argmax_fn = [p, c, lam, centered](const std::vector<double>& x) {
    const double mx = centered ? mean_p(p, x) : 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) ss += p[i] * (x[i] - mx) * (x[i] - mx);
    std::vector<double> q(p.size(), c);
    if (ss > 0.0)
      for (std::size_t i = 0; i < p.size(); ++i) q[i] += lam * (x[i] - mx) / std::sqrt(ss);
    return q;
  };
  e.support_fn = [p, f = e.argmax_fn](const std::vector<double>& x) { return dot_p(p, f(x), x); };
  return e;
}

// Q -> Q + c applied to every density entry.
Envelope shifted(Envelope e, double c) {
  const std::size_t n = e.atoms();
  if (e.form == Envelope::Form::oracle) {
    auto contains = e.contains_fn;
    auto argmax = e.argmax_fn;
    const auto p = e.probs;
    e.contains_fn = [contains, c](const std::vector<double>& q, double tol) {
      auto s = q;
      for (auto& v : s) v -= c;
      return contains(s, tol);
    };
    e.argmax_fn = [argmax, c](const std::vector<double>& x) {
      auto q = argmax(x);
      for (auto& v : q) v += c;
      return q;
    };
    e.support_fn = [p, f = e.argmax_fn](const std::vector<double>& x) { return dot_p(p, f(x), x); };
    return e;
  }
  // old Q = new Q - c: move the constant to the right-hand sides
  for (std::size_t r = 0; r < e.a_eq.size(); ++r)
    for (std::size_t i = 0; i < n; ++i) e.b_eq[r] += c * e.a_eq[r][i];
  for (std::size_t r = 0; r < e.a_le.size(); ++r)
    for (std::size_t i = 0; i < n; ++i) e.b_le[r] += c * e.a_le[r][i];
  for (std::size_t i = 0; i < n; ++i) e.lower[i] += c, e.upper[i] += c;
  return e;
}

[[noreturn]] void no_envelope(const CatalogSpec& s, FunctionalKind k, const char* why) {
  throw ValidationError(family_name(s.family) + " " + to_string(k) + ": " + why);
}

}  // namespace

SupportResult envelope_support(const Envelope& env, const std::vector<double>& x) {
  const std::size_t n = env.atoms();
  if (x.size() != n) throw ValidationError("outcome vector and envelope atoms differ");
  if (env.form == Envelope::Form::oracle) {
    auto q = env.argmax_fn(x);
    return {env.support_fn(x), std::move(q)};
  }
  LpProblem lp;
  lp.c.assign(n + env.aux, 0.0);
  for (std::size_t i = 0; i < n; ++i) lp.c[i] = -env.probs[i] * x[i];
  lp.a_eq = env.a_eq, lp.b_eq = env.b_eq, lp.a_le = env.a_le, lp.b_le = env.b_le;
  lp.lower = env.lower, lp.upper = env.upper;
  const auto sol = solve_lp(lp);
  if (sol.status == LpStatus::unbounded) return {kInf, {}};
  if (sol.status != LpStatus::optimal) throw ValidationError("envelope '" + env.label + "' is empty");
  return {-sol.objective, std::vector<double>(sol.x.begin(), sol.x.begin() + static_cast<long>(n))};
}

bool envelope_contains(const Envelope& env, const std::vector<double>& q, double tol) {
  const std::size_t n = env.atoms();
  if (q.size() != n) throw ValidationError("density vector and envelope atoms differ");
  if (env.form == Envelope::Form::oracle) return env.contains_fn(q, tol);
  LpProblem lp;
  lp.c.assign(n + env.aux, 0.0);
  lp.a_eq = env.a_eq, lp.b_eq = env.b_eq, lp.a_le = env.a_le, lp.b_le = env.b_le;
  lp.lower = env.lower, lp.upper = env.upper;
  for (std::size_t i = 0; i < n; ++i) {
    if (q[i] < env.lower[i] - tol || q[i] > env.upper[i] + tol) return false;
    lp.lower[i] = q[i] - tol;
    lp.upper[i] = q[i] + tol;
  }
  return solve_lp(lp).status == LpStatus::optimal;
}

Envelope envelope_extract(const CatalogSpec& s, FunctionalKind kind, const std::vector<double>& p) {
  if (p.empty()) throw ValidationError("envelope needs at least one atom");
  const bool risk_side = kind == FunctionalKind::risk || kind == FunctionalKind::deviation;
  const double shift_back = kind == FunctionalKind::deviation || kind == FunctionalKind::regret ? 1.0 : 0.0;
  auto finish = [&](Envelope e, double shift) {
    // risk-side envelopes are built for the risk, error-side for the error
    if (kind == FunctionalKind::deviation) return shifted(std::move(e), -shift);
    if (kind == FunctionalKind::regret) return shifted(std::move(e), shift);
    return e;
  };
  switch (s.family) {
    case Family::standard_mean:
      return risk_side ? ball_envelope(p, kind == FunctionalKind::risk ? 1.0 : 0.0, s.lambda, true, "L2 ball envelope")
                       : ball_envelope(p, kind == FunctionalKind::regret ? 1.0 : 0.0, s.lambda, false,
                                       "L2 ball envelope");
    case Family::quantile:
      if (risk_side) return finish(cvar_envelope(p, s.alpha), shift_back);
      return finish(box_envelope(p, -1.0, s.alpha / (1.0 - s.alpha), "Koenker-Bassett box"), shift_back);
    case Family::qsa:
      if (risk_side) return finish(qsa_risk_envelope(p, s.alpha), shift_back);
      return finish(qsa_error_envelope(p, s.alpha), shift_back);
    case Family::qsau:
      if (s.eps != 0.0) no_envelope(s, kind, "not positively homogeneous for eps > 0");
      if (risk_side) return finish(cvar_envelope(p, 0.5), shift_back);
      return finish(box_envelope(p, -1.0, 1.0, "absolute value box"), shift_back);
    case Family::expectile_pl: {
      const double q = expectile_level_from_k(s.k);
      if (risk_side) return finish(expectile_risk_envelope(p, q), shift_back);
      return finish(expectile_error_envelope(p, s.k), shift_back);
    }
    case Family::biased_mean:
      if (s.x != 0.0) no_envelope(s, kind, "not positively homogeneous for x != 0");
      [[fallthrough]];
    case Family::mean_pl:
      if (risk_side) return finish(mean_pl_risk_envelope(p), shift_back);
      return finish(mean_pl_error_envelope(p), shift_back);
    case Family::expectile_mse: no_envelope(s, kind, "not positively homogeneous");
    case Family::cvar2: no_envelope(s, kind, "no finite polyhedral description; use envelope_from_functional");
  }
  no_envelope(s, kind, "unknown family");
}

namespace {

DiscreteRv rv_of(const std::vector<double>& x, const std::vector<double>& p) { return DiscreteRv(x, p); }

std::vector<double> numeric_density(const Functional& f, const std::vector<double>& x, const std::vector<double>& p) {
  double scale = 1.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  const double h = 1e-6 * scale;
  std::vector<double> q(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto up = x, dn = x;
    up[i] += h, dn[i] -= h;
    q[i] = (f(rv_of(up, p)) - f(rv_of(dn, p))) / (2.0 * h) / p[i];
  }
  return q;
}

double conjugate_in_box(const Functional& f, const std::vector<double>& q, const std::vector<double>& p, double box,
                        std::vector<double>& arg) {
  const std::size_t n = p.size();
  auto g = [&](const std::vector<double>& x) { return f(rv_of(x, p)) - dot_p(p, x, q); };
  if (n <= 3) {
    ScalarOptions o;
    o.grid = n == 1 ? 65 : 17;
    o.tol = 1e-9;
    const auto m = minimize_nested(g, std::vector<double>(n, -box), std::vector<double>(n, box), o);
    arg = m.x;
    return -std::min(m.value, g(std::vector<double>(n, 0.0)));
  }
  auto sub = [&](const std::vector<double>& x) {
    auto d = numeric_density(f, x, p);
    for (std::size_t i = 0; i < n; ++i) d[i] = p[i] * (d[i] - q[i]);
    return d;
  };
  auto proj = [box](std::vector<double> x) {
    for (auto& v : x) v = std::clamp(v, -box, box);
    return x;
  };
  SubgradientOptions o;
  o.steps = 20000;
  o.step0 = 0.1 * box;
  const auto r = minimize_subgradient(g, sub, proj, std::vector<double>(n, 0.0), o);
  arg = r.x;
  return -r.value;
}

}  // namespace

ConjugateResult conjugate_eval(const Functional& f, const std::vector<double>& q, const std::vector<double>& p,
                               double box) {
  if (q.size() != p.size()) throw ValidationError("density vector and atom count differ");
  if (!(box > 0.0)) throw ValidationError("conjugate search box must be positive");
  ConjugateResult r;
  r.value = conjugate_in_box(f, q, p, box, r.maximizer);
  std::vector<double> wide_arg;
  const double wide = conjugate_in_box(f, q, p, 4.0 * box, wide_arg);
  if (wide > r.value + 1e-6 * (1.0 + std::abs(r.value))) {
    r.unbounded = true;
    r.value = kInf;
  }
  return r;
}

Envelope envelope_from_functional(const Functional& f, const std::vector<double>& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int s = 0; s < 20; ++s) {
    std::vector<double> x(p.size());
    for (auto& v : x) v = nd(rng);
    const double base = f(rv_of(x, p));
    for (double lam : {0.5, 2.0, 3.7}) {
      auto y = x;
      for (auto& v : y) v *= lam;
      if (std::abs(f(rv_of(y, p)) - lam * base) > 1e-7 * (1.0 + std::abs(lam * base)))
        throw ValidationError("functional is not positively homogeneous; it has no envelope");
    }
  }
  Envelope e;
  e.form = Envelope::Form::oracle;
  e.label = "conjugate oracle";
  e.probs = p;
  e.contains_fn = [f, p](const std::vector<double>& q, double tol) {
    const auto c = conjugate_eval(f, q, p);
    return !c.unbounded && c.value <= std::max(tol, 1e-8);
  };
  // a PH functional equals its support function; a gradient attains it
  e.support_fn = [f, p](const std::vector<double>& x) { return f(rv_of(x, p)); };
  e.argmax_fn = [f, p](const std::vector<double>& x) { return numeric_density(f, x, p); };
  return e;
}

DualAxiomReport dual_axiom_check(const Envelope& env, FunctionalKind kind, std::uint64_t seed, int samples) {
  DualAxiomReport r;
  const auto& p = env.probs;
  const std::size_t n = p.size();
  const bool unit_center = kind == FunctionalKind::risk || kind == FunctionalKind::regret;
  const bool mean_side = kind == FunctionalKind::risk || kind == FunctionalKind::regret;
  r.center = envelope_contains(env, std::vector<double>(n, unit_center ? 1.0 : 0.0), 1e-9);
  if (!r.center) r.failures.push_back(std::string("center ") + (unit_center ? "1" : "0") + " not in the set");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  r.hyperplane = r.separation = true;
  const bool has_plane = kind == FunctionalKind::risk || kind == FunctionalKind::deviation;
  const double plane = kind == FunctionalKind::risk ? 1.0 : 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<double> x(n);
    // the first samples probe constants, which only error and regret must separate
    const bool constant = s < 2 && !has_plane;
    for (auto& v : x) v = constant ? (s == 0 ? 1.0 : -1.0) : nd(rng);
    const auto sup = envelope_support(env, x);
    if (has_plane && !sup.density.empty() && std::abs(mean_p(p, sup.density) - plane) > 1e-9) {
      if (r.hyperplane) r.failures.push_back("a set point leaves the E[Q] hyperplane");
      r.hyperplane = false;
    }
    const bool trivial = has_plane ? *std::max_element(x.begin(), x.end()) == *std::min_element(x.begin(), x.end())
                                   : std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
    if (trivial) continue;
    const double threshold = mean_side ? mean_p(p, x) : 0.0;
    if (!(sup.value > threshold + 1e-9)) {
      if (r.separation) r.failures.push_back("no set point separates a sampled X");
      r.separation = false;
    }
  }
  return r;
}

}  // namespace rq
