#include "rq/catalog.hpp"

#include <algorithm>
#include <cmath>

namespace rq {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(what);
}

// Tail masses S_k = sum_{j>k} p_j, computed from the top to avoid 1 - F cancellation.
std::vector<double> tail_masses(const DiscreteRv& x) {
  const std::size_t n = x.size();
  std::vector<double> s(n, 0.0);
  for (std::size_t k = n - 1; k-- > 0;) s[k] = s[k + 1] + x.prob(k + 1);
  return s;
}

// B_k = sum_{j>k} p_j (x_j - x_k): on the CDF segment of atom k,
// CVaR_beta = x_k + B_k / (1 - beta).
std::vector<double> excess_weights(const DiscreteRv& x) {
  const std::size_t n = x.size();
  std::vector<double> b(n, 0.0);
  double mass = 0.0, first = 0.0;  // running sum p_j and p_j x_j over j > k
  for (std::size_t k = n; k-- > 0;) {
    b[k] = first - mass * x.value(k);
    mass += x.prob(k);
    first += x.prob(k) * x.value(k);
  }
  return b;
}

void check_unit(double a, const char* what) { require(a > 0.0 && a < 1.0, what); }

}  // namespace

const std::vector<Family>& all_families() {
  static const std::vector<Family> f{Family::standard_mean, Family::quantile,      Family::cvar2,
                                     Family::qsa,           Family::qsau,          Family::expectile_mse,
                                     Family::expectile_pl,  Family::mean_pl,       Family::biased_mean};
  return f;
}

std::string family_name(Family f) {
  switch (f) {
    case Family::standard_mean: return "standard_mean";
    case Family::quantile: return "quantile";
    case Family::cvar2: return "cvar2";
    case Family::qsa: return "qsa";
    case Family::qsau: return "qsau";
    case Family::expectile_mse: return "expectile_mse";
    case Family::expectile_pl: return "expectile_pl";
    case Family::mean_pl: return "mean_pl";
    case Family::biased_mean: return "biased_mean";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  for (Family f : all_families())
    if (family_name(f) == name) return f;
  throw ValidationError("unknown quadrangle family '" + name + "'");
}

double expectile_value(const DiscreteRv& x, double q) {
  check_unit(q, "expectile level q must lie in (0,1)");
  if (x.is_constant()) return x.value(0);
  if (q == 0.5) return expectation(x);
  // balance(C) = q E(X-C)+ - (1-q) E(X-C)- is decreasing and linear between atoms
  const std::size_t n = x.size();
  double below_mass = 0.0, below_first = 0.0;
  double above_mass = 1.0, above_first = expectation(x);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    below_mass += x.prob(k);
    below_first += x.prob(k) * x.value(k);
    above_mass -= x.prob(k);
    above_first -= x.prob(k) * x.value(k);
    // on [x_k, x_{k+1}]: q (A - B C) = (1-q) (D C - E)
    const double c = (q * above_first + (1.0 - q) * below_first) / (q * above_mass + (1.0 - q) * below_mass);
    if (c <= x.value(k + 1) || k + 2 == n) return std::clamp(c, x.value(k), x.value(k + 1));
  }
  return x.value(n - 1);
}

double expectile_level_from_k(double k) {
  if (k < -1.0)
    throw ValidationError(
        "expectile parameter K < -1 corresponds to q < 1/2, where the expectile changes its properties; only K > 0 is "
        "supported");
  require(k > 0.0, "expectile parameter K must be positive");
  return (1.0 + k) / (1.0 + 2.0 * k);
}

double cvar_integral(const DiscreteRv& x, double from) {
  require(from >= 0.0 && from <= 1.0, "integration level must lie in [0,1]");
  const std::size_t n = x.size();
  const auto s = tail_masses(x);
  const auto b = excess_weights(x);
  const double u_from = 1.0 - from;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    // segment beta in [F_{k-1}, F_k], written in u = 1 - beta: u in [S_k, S_k + p_k]
    const double u_hi = std::min(u_from, s[k] + x.prob(k));
    const double u_lo = s[k];
    if (u_hi <= u_lo) continue;
    total += x.value(k) * (u_hi - u_lo);
    if (b[k] != 0.0 && u_lo > 0.0) total += b[k] * std::log(u_hi / u_lo);
  }
  return total;
}

double cvar_positive_integral(const DiscreteRv& x) {
  const std::size_t n = x.size();
  const auto s = tail_masses(x);
  const auto b = excess_weights(x);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double xk = x.value(k);
    const double u_hi = s[k] + x.prob(k);
    const double u_lo = s[k];
    if (u_lo <= 0.0) {  // top segment: CVaR is the constant x_k
      if (xk > 0.0) total += xk * u_hi;
      continue;
    }
    // integrand x_k + B_k/u is decreasing in u
    if (xk + b[k] / u_lo <= 0.0) continue;
    double top = u_hi;
    if (xk + b[k] / u_hi < 0.0) top = -b[k] / xk;  // zero crossing
    total += xk * (top - u_lo) + b[k] * std::log(top / u_lo);
  }
  return total;
}

double symmetric_cvar_risk(const DiscreteRv& x, double alpha) {
  require(alpha >= 0.0 && alpha < 1.0, "symmetric level must lie in [0,1)");
  const double lo = 0.5 * (1.0 - alpha), hi = 0.5 * (1.0 + alpha);
  return 0.5 * ((1.0 + alpha) * cvar_direct(x, lo) + (1.0 - alpha) * cvar_direct(x, hi));
}

namespace {

// Half-spread of the symmetric quantile pair at alpha, as a set.
StatInterval half_spread(const DiscreteRv& x, double alpha) {
  const StatInterval l = quantile_interval(x, 0.5 * (1.0 - alpha));
  const StatInterval u = quantile_interval(x, 0.5 * (1.0 + alpha));
  return (u - l) * 0.5;
}

std::vector<double> critical_levels(const DiscreteRv& x) {
  std::vector<double> c{0.0};
  double cdf = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    cdf += x.prob(k);
    const double a = std::abs(2.0 * cdf - 1.0);
    if (a > 1e-13 && a < 1.0) c.push_back(a);
  }
  std::sort(c.begin(), c.end());
  std::vector<double> out;
  for (double a : c)
    if (out.empty() || a - out.back() > 1e-13) out.push_back(a);
  return out;
}

std::vector<StatInterval> merge(std::vector<StatInterval> v, double tol) {
  std::sort(v.begin(), v.end(), [](const StatInterval& a, const StatInterval& b) { return a.lo() < b.lo(); });
  std::vector<StatInterval> out;
  for (const auto& s : v) {
    if (!out.empty() && s.lo() <= out.back().hi() + tol)
      out.back() = out.back().hull(s);
    else
      out.push_back(s);
  }
  return out;
}

void check_eps(const DiscreteRv& x, double eps) {
  require(eps >= 0.0, "insensitivity eps must be nonnegative");
  if (!(eps < 0.5 * (x.max() - x.min())))
    throw ValidationError("insensitivity eps must be below half the range of X (ess sup - ess inf)/2");
}

}  // namespace

std::vector<StatInterval> alpha_set(const DiscreteRv& x, double eps) {
  check_eps(x, eps);
  const double tol = 1e-12 * probe_scale(x);
  const auto crit = critical_levels(x);
  std::vector<StatInterval> parts;
  for (std::size_t i = 0; i < crit.size(); ++i) {
    if (half_spread(x, crit[i]).contains(eps, tol)) parts.push_back(StatInterval::point(crit[i]));
    // open segment to the next critical level; the last one reaches the full range and never matches
    if (i + 1 < crit.size()) {
      const double mid = 0.5 * (crit[i] + crit[i + 1]);
      if (std::abs(half_spread(x, mid).mid() - eps) <= tol) parts.emplace_back(crit[i], crit[i + 1]);
    }
  }
  return merge(std::move(parts), 0.0);
}

std::vector<StatInterval> qsau_statistic_union(const DiscreteRv& x, double eps) {
  const auto levels = alpha_set(x, eps);
  const auto crit = critical_levels(x);
  const double tol = 1e-12 * probe_scale(x);
  std::vector<StatInterval> mids;
  auto pairs_at = [&](double alpha) {
    // quantile pairs a in q_l, b in q_u with b - a = 2 eps; midpoint a + eps
    const StatInterval l = quantile_interval(x, 0.5 * (1.0 - alpha));
    const StatInterval u = quantile_interval(x, 0.5 * (1.0 + alpha));
    const double lo = std::max(l.lo(), u.lo() - 2.0 * eps);
    const double hi = std::min(l.hi(), u.hi() - 2.0 * eps);
    if (lo <= hi + tol) mids.emplace_back(std::min(lo, hi) + eps, std::max(lo, hi) + eps);
  };
  for (const auto& seg : levels) {
    for (double c : crit)
      if (seg.contains(c, 1e-13)) pairs_at(c);
    for (std::size_t i = 0; i + 1 < crit.size(); ++i) {
      const double mid = 0.5 * (crit[i] + crit[i + 1]);
      if (seg.contains(mid)) pairs_at(mid);
    }
  }
  if (mids.empty()) throw ConvergenceError("no symmetric quantile pair matches the insensitivity");
  return merge(std::move(mids), tol);
}

Quartet make_catalog_quadrangle(const CatalogSpec& sp) {
  Quartet q;
  q.label = family_name(sp.family);
  Flags& f = q.flags;
  switch (sp.family) {
    case Family::standard_mean: {
      const double lam = sp.lambda;
      require(lam > 0.0, "lambda must be positive");
      q.statistic = [](const DiscreteRv& x) { return StatInterval::point(expectation(x)); };
      q.risk = [lam](const DiscreteRv& x) { return expectation(x) + lam * stddev(x); };
      q.deviation = [lam](const DiscreteRv& x) { return lam * stddev(x); };
      q.regret = [lam](const DiscreteRv& x) { return expectation(x) + lam * p_norm(x, 2.0); };
      q.error = [lam](const DiscreteRv& x) { return lam * p_norm(x, 2.0); };
      f.positively_homogeneous = true;
      break;
    }
    case Family::quantile: {
      const double a = sp.alpha;
      check_unit(a, "alpha must lie in (0,1)");
      q.loss = koenker_bassett_loss(a);
      q.statistic = [a](const DiscreteRv& x) { return quantile_interval(x, a); };
      q.risk = [a](const DiscreteRv& x) { return cvar_direct(x, a); };
      q.deviation = [a](const DiscreteRv& x) { return cvar_direct(x, a) - expectation(x); };
      q.regret = [a](const DiscreteRv& x) { return positive_mean(x) / (1.0 - a); };
      q.error = [a](const DiscreteRv& x) { return a / (1.0 - a) * positive_mean(x) + negative_mean(x); };
      f.positively_homogeneous = f.monotone = f.expectation_type = true;
      break;
    }
    case Family::cvar2: {
      const double a = sp.alpha;
      check_unit(a, "alpha must lie in (0,1)");
      q.statistic = [a](const DiscreteRv& x) { return StatInterval::point(cvar_direct(x, a)); };
      q.risk = [a](const DiscreteRv& x) { return cvar_integral(x, a) / (1.0 - a); };
      q.deviation = [a](const DiscreteRv& x) { return cvar_integral(x, a) / (1.0 - a) - expectation(x); };
      q.regret = [a](const DiscreteRv& x) { return cvar_positive_integral(x) / (1.0 - a); };
      q.error = [a](const DiscreteRv& x) { return cvar_positive_integral(x) / (1.0 - a) - expectation(x); };
      f.positively_homogeneous = f.monotone = true;
      break;
    }
    case Family::qsa: {
      const double a = sp.alpha;
      check_unit(a, "alpha must lie in (0,1)");
      q.statistic = [a](const DiscreteRv& x) {
        return (quantile_interval(x, 0.5 * (1.0 - a)) + quantile_interval(x, 0.5 * (1.0 + a))) * 0.5;
      };
      q.risk = [a](const DiscreteRv& x) { return symmetric_cvar_risk(x, a); };
      q.deviation = [a](const DiscreteRv& x) { return symmetric_cvar_risk(x, a) - expectation(x); };
      q.error = [a](const DiscreteRv& x) { return (1.0 - a) * cvar_direct(x.abs(), a); };
      q.regret = [a](const DiscreteRv& x) { return (1.0 - a) * cvar_direct(x.abs(), a) + expectation(x); };
      f.positively_homogeneous = f.monotone = true;
      break;
    }
    case Family::qsau: {
      const double eps = sp.eps;
      require(eps >= 0.0 && std::isfinite(eps), "insensitivity eps must be nonnegative");
      q.loss = vapnik_loss(eps);
      // once eps reaches half the range every residual fits in the tube: D = 0
      auto inside_tube = [eps](const DiscreteRv& x) { return !(eps < 0.5 * (x.max() - x.min())); };
      auto risk = [eps, inside_tube](const DiscreteRv& x) {
        if (inside_tube(x)) return expectation(x);
        const auto levels = alpha_set(x, eps);
        const double a = levels.front().lo();
        return symmetric_cvar_risk(x, a) - (1.0 - a) * eps;
      };
      q.risk = risk;
      q.deviation = [risk](const DiscreteRv& x) { return risk(x) - expectation(x); };
      q.statistic = [eps, inside_tube](const DiscreteRv& x) {
        if (inside_tube(x)) return StatInterval(x.max() - eps, x.min() + eps);
        const auto u = qsau_statistic_union(x, eps);
        return StatInterval(u.front().lo(), u.back().hi());
      };
      q.error = [eps](const DiscreteRv& x) {
        return x.expect([eps](double t) { return std::max(std::abs(t) - eps, 0.0); });
      };
      q.regret = [eps](const DiscreteRv& x) {
        return x.expect([eps](double t) { return std::max(std::abs(t) - eps, 0.0); }) + expectation(x);
      };
      f.positively_homogeneous = eps == 0.0;
      f.monotone = f.expectation_type = true;
      break;
    }
    case Family::expectile_mse: {
      const double lv = sp.q;
      check_unit(lv, "expectile level q must lie in (0,1)");
      q.loss = asymmetric_square_loss(lv);
      auto err = [lv](const DiscreteRv& x) {
        return x.expect([lv](double t) { return t > 0.0 ? lv * t * t : (1.0 - lv) * t * t; });
      };
      q.statistic = [lv](const DiscreteRv& x) { return StatInterval::point(expectile_value(x, lv)); };
      q.deviation = [lv, err](const DiscreteRv& x) { return err(x.shift(-expectile_value(x, lv))); };
      q.risk = [lv, err](const DiscreteRv& x) { return err(x.shift(-expectile_value(x, lv))) + expectation(x); };
      q.error = err;
      q.regret = [err](const DiscreteRv& x) { return err(x) + expectation(x); };
      f.expectation_type = true;
      break;
    }
    case Family::expectile_pl: {
      const double k = sp.k;
      const double lv = expectile_level_from_k(k);
      q.statistic = [lv](const DiscreteRv& x) { return StatInterval::point(expectile_value(x, lv)); };
      q.risk = [lv](const DiscreteRv& x) { return expectile_value(x, lv); };
      q.deviation = [lv](const DiscreteRv& x) { return expectile_value(x, lv) - expectation(x); };
      q.regret = [k](const DiscreteRv& x) { return std::max(expectation(x) + positive_mean(x) / k, 0.0); };
      q.error = [k](const DiscreteRv& x) { return std::max(-expectation(x), positive_mean(x) / k); };
      f.positively_homogeneous = f.monotone = true;
      break;
    }
    case Family::mean_pl: {
      q.statistic = [](const DiscreteRv& x) { return StatInterval::point(expectation(x)); };
      q.deviation = [](const DiscreteRv& x) { return positive_mean(x.shift(-expectation(x))); };
      q.risk = [](const DiscreteRv& x) { return positive_mean(x.shift(-expectation(x))) + expectation(x); };
      q.error = [](const DiscreteRv& x) { return std::max(negative_mean(x), positive_mean(x)); };
      q.regret = [](const DiscreteRv& x) { return std::max(negative_mean(x), positive_mean(x)) + expectation(x); };
      f.positively_homogeneous = f.monotone = true;
      break;
    }
    case Family::biased_mean: {
      const double b = sp.x;
      require(std::isfinite(b), "bias x must be finite");
      const double bp = std::max(b, 0.0), bm = std::max(-b, 0.0);
      // the argmin widens to the support edge once x + E X leaves the support
      q.statistic = [b](const DiscreteRv& x) {
        const double c = b + expectation(x);
        if (b > 0.0 && c > x.max()) return StatInterval(x.max(), c);
        if (b < 0.0 && c < x.min()) return StatInterval(c, x.min());
        return StatInterval::point(c);
      };
      q.deviation = [b, bm](const DiscreteRv& x) { return positive_mean(x.shift(-expectation(x) - b)) - bm; };
      q.risk = [b, bm](const DiscreteRv& x) {
        return positive_mean(x.shift(-expectation(x) - b)) - bm + expectation(x);
      };
      q.error = [bp, bm](const DiscreteRv& x) { return std::max(negative_mean(x) - bp, positive_mean(x) - bm); };
      q.regret = [bp, bm](const DiscreteRv& x) {
        return std::max(negative_mean(x) - bp, positive_mean(x) - bm) + expectation(x);
      };
      f.positively_homogeneous = b == 0.0;
      f.monotone = true;
      break;
    }
  }
  f.coherent = f.monotone && f.positively_homogeneous;
  return q;
}

}  // namespace rq
