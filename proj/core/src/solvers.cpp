#include "rq/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rq {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5)-1)/2

bool decreases(double from, double to) {
  return to < from - 1e-14 * (1.0 + std::abs(from));
}

// Golden section on [a, b]; returns the best point evaluated.
std::pair<double, double> golden(const ScalarFn& f, double a, double b, double tol) {
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 400; ++it) {
    if (b - a <= tol * (1.0 + std::abs(x1) + std::abs(x2))) break;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace

ScalarMin minimize_scalar_convex(const ScalarFn& f, double lo, double hi, const ScalarOptions& opt) {
  if (std::isnan(lo) || std::isnan(hi)) throw ValidationError("bracket must be finite");
  if (lo > hi) std::swap(lo, hi);
  if (lo == hi) return {lo, f(lo), false, false};
  const int n = std::max(opt.grid, 5);
  std::vector<double> xs(n), fs(n);
  ScalarMin out;
  for (int round = 0;; ++round) {
    for (int i = 0; i < n; ++i) {
      xs[i] = (i == n - 1) ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      fs[i] = f(xs[i]);
    }
    const int best = static_cast<int>(std::min_element(fs.begin(), fs.end()) - fs.begin());
    const double w = hi - lo;
    const bool past_cap = std::max(std::abs(lo), std::abs(hi)) > opt.cap;
    if (!std::isfinite(fs[best])) {
      if (std::isinf(fs[best]) && fs[best] < 0) {
        out = {xs[best], fs[best], true, false};
        return out;
      }
      if (!opt.expand || past_cap) throw ValidationError("objective is infinite on the whole search range");
      lo -= w;
      hi += w;
      continue;
    }
    if (best == 0 && decreases(fs[1], fs[0])) {
      if (!opt.expand) {
        out.at_edge = true;
      } else if (past_cap) {
        return {xs[0], -kInf, true, false};
      } else {
        hi = xs[2];
        lo -= 2.0 * w;
        continue;
      }
    } else if (best == n - 1 && decreases(fs[n - 2], fs[n - 1])) {
      if (!opt.expand) {
        out.at_edge = true;
      } else if (past_cap) {
        return {xs[n - 1], -kInf, true, false};
      } else {
        lo = xs[n - 3];
        hi += 2.0 * w;
        continue;
      }
    }
    const double a = xs[std::max(best - 1, 0)];
    const double b = xs[std::min(best + 1, n - 1)];
    auto [x, v] = golden(f, a, b, opt.tol);
    if (v <= fs[best]) {
      out.argmin = x;
      out.value = v;
    } else {
      out.argmin = xs[best];
      out.value = fs[best];
    }
    return out;
  }
}

ScalarMin minimize_scalar_convex(const ScalarFn& f, const ScalarOptions& opt) {
  ScalarOptions o = opt;
  o.expand = true;
  return minimize_scalar_convex(f, -1.0, 1.0, o);
}

StatInterval argmin_set(const ScalarFn& f, const ScalarMin& m, double scale) {
  if (m.unbounded) throw ConvergenceError("objective is unbounded below");
  const double h = 1e-6 * std::max(scale, 1e-300);
  double c = m.argmin;
  double fc = f(c);
  const double eta = 1e-14 * (1.0 + std::abs(fc));
  // right_down(t): f drops when stepping right, so t is left of the argmin set
  auto right_down = [&](double t) {
    const double ft = f(t);
    return !std::isfinite(ft) || f(t + h) < ft - eta;
  };
  auto left_down = [&](double t) {
    const double ft = f(t);
    return !std::isfinite(ft) || f(t - h) < ft - eta;
  };
  for (int i = 0; i < 64 && right_down(c); ++i) c += h;
  for (int i = 0; i < 64 && left_down(c); ++i) c -= h;

  auto boundary = [&](auto&& outside, double dir) {
    double step = h;
    double far = c + dir * step;
    while (!outside(far)) {
      step *= 2.0;
      if (step > 1e18 * (1.0 + std::abs(c))) throw ConvergenceError("argmin set is not bounded");
      far = c + dir * step;
    }
    double in = c;
    for (int it = 0; it < 200 && std::abs(far - in) > 1e-15 * (1.0 + std::abs(in)); ++it) {
      const double mid = 0.5 * (in + far);
      if (outside(mid))
        far = mid;
      else
        in = mid;
    }
    return in;
  };
  const double a = boundary(right_down, -1.0);
  const double b = boundary(left_down, +1.0);
  if (b - a > 2.5 * h) return {a, b};
  if (b - a < 0.25 * h) return StatInterval::point(0.5 * (a + b));
  // smooth bottom: sign change of a central difference, then again with a
  // narrower stencil inside the first bracket (curvature kinks bias wide ones)
  auto diff_root = [&](double d, double lo, double hi, double fallback) {
    auto slope = [&](double t) { return f(t + d) - f(t - d); };
    if (!(slope(lo) < 0.0) || !(slope(hi) > 0.0)) return fallback;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double s = slope(mid);
      if (s < 0.0) {
        lo = mid;
      } else if (s > 0.0) {
        hi = mid;
      } else {
        return mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  const double wide = 1e-4 * scale;
  double root = diff_root(wide, a - h, b + h, c);
  root = diff_root(h, root - 2.0 * wide, root + 2.0 * wide, root);
  // An asymmetric kink biases the difference root by O(d); golden section is
  // exact there. Equal values up to rounding mean a smooth bottom.
  const double fg = f(m.argmin);
  if (std::isfinite(fg) && fg < f(root) - eta) return StatInterval::point(m.argmin);
  return StatInterval::point(root);
}

StatInterval argmin_interval_pwl(std::vector<double> bp, const ScalarFn& f, double tol) {
  if (bp.empty()) throw ValidationError("piecewise-linear argmin needs at least one breakpoint");
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  const std::size_t n = bp.size();
  const double span = std::max(1.0, bp.back() - bp.front());
  std::vector<double> xs;
  xs.reserve(n + 2);
  xs.push_back(bp.front() - span);
  xs.insert(xs.end(), bp.begin(), bp.end());
  xs.push_back(bp.back() + span);
  std::vector<double> fs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = f(xs[i]);
  double prev = -kInf;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double s = (fs[i + 1] - fs[i]) / (xs[i + 1] - xs[i]);
    if (s < prev - 1e-9 * (1.0 + std::abs(prev))) throw ValidationError("slope sequence is not convex");
    prev = s;
  }
  const double m = *std::min_element(fs.begin(), fs.end());
  const double cut = m + tol * (1.0 + std::abs(m));
  std::size_t first = xs.size(), last = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (fs[i] <= cut) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == 0 || last == xs.size() - 1) throw ValidationError("minimum is not attained inside the breakpoints");
  return {xs[first], xs[last]};
}

double last_nonnegative(const ScalarFn& g, double lo, double hi, int iters) {
  if (g(lo) < 0.0) return lo;
  if (g(hi) >= 0.0) return hi;
  for (int it = 0; it < iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

SubgradientResult minimize_subgradient(const VectorFn& f, const VectorMap& subgrad, const VectorMap& project,
                                       std::vector<double> x0, const SubgradientOptions& opt) {
  std::vector<double> x = project(std::move(x0));
  SubgradientResult best{x, f(x), 0};
  double a = opt.step0;
  if (a <= 0.0) {
    double mx = 1.0;
    for (double v : x) mx = std::max(mx, std::abs(v));
    a = 0.5 * mx;
  }
  int since_improve = 0;
  for (int k = 1; k <= opt.steps; ++k) {
    const std::vector<double> g = subgrad(x);
    double nrm = 0.0;
    for (double gi : g) nrm += gi * gi;
    nrm = std::sqrt(nrm);
    best.iterations = k;
    if (nrm == 0.0) break;
    const double step = a / std::sqrt(static_cast<double>(k)) / nrm;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= step * g[i];
    x = project(x);
    const double v = f(x);
    if (v < best.value - opt.tol) {
      since_improve = 0;
    } else {
      ++since_improve;
    }
    if (v < best.value) {
      best.value = v;
      best.x = x;
    }
    if (opt.tol > 0.0 && since_improve > 2000) break;
  }
  return best;
}

BoxMin minimize_nested(const VectorFn& f, const std::vector<double>& lo, const std::vector<double>& hi,
                       const ScalarOptions& opt) {
  const std::size_t d = lo.size();
  if (hi.size() != d || d == 0) throw ValidationError("nested search needs matching nonempty bounds");
  std::vector<double> x(d);
  for (std::size_t i = 0; i < d; ++i) x[i] = 0.5 * (lo[i] + hi[i]);
  ScalarOptions inner_opt = opt;
  inner_opt.expand = false;  // the box is hard; callers grow it themselves
  std::function<double(std::size_t)> level = [&](std::size_t k) -> double {
    if (k == d) return f(x);
    auto inner = [&](double t) {
      x[k] = t;
      return level(k + 1);
    };
    ScalarMin m;
    try {
      m = minimize_scalar_convex(inner, lo[k], hi[k], inner_opt);
    } catch (const ValidationError&) {
      if (k == 0) throw;
      return kInf;  // empty slice of the feasible set
    }
    x[k] = m.argmin;
    return level(k + 1);
  };
  BoxMin out;
  out.value = level(0);
  out.x = x;
  return out;
}

// ---------------------------------------------------------------------------
// Simplex

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-10;

struct Tableau {
  std::size_t m = 0;                      // rows
  std::size_t n = 0;                      // columns (excluding rhs)
  std::vector<std::vector<double>> a;     // m x (n+1), last column rhs
  std::vector<std::size_t> basis;         // basic column per row
  std::vector<bool> allowed;              // column may enter

  void pivot(std::size_t r, std::size_t col) {
    const double pv = a[r][col];
    for (double& v : a[r]) v /= pv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r) continue;
      const double factor = a[i][col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j <= n; ++j) a[i][j] -= factor * a[r][j];
      a[i][col] = 0.0;
    }
    basis[r] = col;
  }

  std::vector<double> reduced_costs(const std::vector<double>& cost) const {
    std::vector<double> rc(cost);
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) rc[j] -= cb * a[i][j];
    }
    return rc;
  }

  // Bland's rule. Returns false if unbounded.
  bool optimize(const std::vector<double>& cost) {
    for (int iter = 0; iter < 200000; ++iter) {
      const std::vector<double> rc = reduced_costs(cost);
      std::size_t enter = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (allowed[j] && rc[j] < -kCostEps) {
          enter = j;
          break;
        }
      }
      if (enter == n) return true;
      std::size_t leave = m;
      double best_ratio = kInf;
      for (std::size_t i = 0; i < m; ++i) {
        if (a[i][enter] > kPivotEps) {
          const double ratio = a[i][n] / a[i][enter];
          if (ratio < best_ratio - 1e-12 ||
              (std::abs(ratio - best_ratio) <= 1e-12 && leave < m && basis[i] < basis[leave])) {
            best_ratio = std::min(ratio, best_ratio);
            leave = i;
          }
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
    throw ConvergenceError("simplex iteration limit reached");
  }
};

struct ColumnMap {
  double offset = 0.0;
  std::size_t col = 0;
  double coef = 1.0;
  std::size_t mirror = SIZE_MAX;  // second column of a split free variable
};

}  // namespace

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

LpSolution solve_lp(const LpProblem& p) {
  const std::size_t nv = p.c.size();
  if (p.a_eq.size() != p.b_eq.size() || p.a_le.size() != p.b_le.size())
    throw ValidationError("constraint rows and right-hand sides differ in count");
  for (const auto& row : p.a_eq)
    if (row.size() != nv) throw ValidationError("equality row has the wrong width");
  for (const auto& row : p.a_le)
    if (row.size() != nv) throw ValidationError("inequality row has the wrong width");
  std::vector<double> lower = p.lower.empty() ? std::vector<double>(nv, 0.0) : p.lower;
  std::vector<double> upper = p.upper.empty() ? std::vector<double>(nv, kInf) : p.upper;
  if (lower.size() != nv || upper.size() != nv) throw ValidationError("bounds have the wrong length");

  // Substitute bounded/free variables by nonnegative columns.
  std::vector<ColumnMap> cmap(nv);
  std::size_t ny = 0;
  std::vector<std::pair<std::size_t, double>> ub_rows;  // (column, bound) for y <= bound
  for (std::size_t j = 0; j < nv; ++j) {
    if (lower[j] > upper[j]) return {LpStatus::infeasible, {}, kInf, false};
    if (std::isfinite(lower[j])) {
      cmap[j] = {lower[j], ny++, 1.0};
      if (std::isfinite(upper[j])) ub_rows.emplace_back(cmap[j].col, upper[j] - lower[j]);
    } else if (std::isfinite(upper[j])) {
      cmap[j] = {upper[j], ny++, -1.0};
    } else {
      cmap[j] = {0.0, ny, 1.0, ny + 1};
      ny += 2;
    }
  }

  struct Row {
    std::vector<double> coef;
    double rhs;
    bool le;
  };
  std::vector<Row> rows;
  auto add_row = [&](const std::vector<double>& a, double b, bool le) {
    Row r{std::vector<double>(ny, 0.0), b, le};
    for (std::size_t j = 0; j < nv; ++j) {
      if (a[j] == 0.0) continue;
      r.rhs -= a[j] * cmap[j].offset;
      r.coef[cmap[j].col] += a[j] * cmap[j].coef;
      if (cmap[j].mirror != SIZE_MAX) r.coef[cmap[j].mirror] -= a[j];
    }
    rows.push_back(std::move(r));
  };
  for (std::size_t i = 0; i < p.a_eq.size(); ++i) add_row(p.a_eq[i], p.b_eq[i], false);
  for (std::size_t i = 0; i < p.a_le.size(); ++i) add_row(p.a_le[i], p.b_le[i], true);
  for (auto [col, b] : ub_rows) {
    Row r{std::vector<double>(ny, 0.0), b, true};
    r.coef[col] = 1.0;
    rows.push_back(std::move(r));
  }

  std::vector<double> cost_y(ny, 0.0);
  double cost_const = 0.0;
  for (std::size_t j = 0; j < nv; ++j) {
    cost_const += p.c[j] * cmap[j].offset;
    cost_y[cmap[j].col] += p.c[j] * cmap[j].coef;
    if (cmap[j].mirror != SIZE_MAX) cost_y[cmap[j].mirror] -= p.c[j];
  }

  const std::size_t m = rows.size();
  std::size_t n_slack = 0;
  for (const auto& r : rows) n_slack += r.le ? 1 : 0;
  Tableau t;
  t.m = m;
  // artificial columns: one per row (unused ones never enter)
  t.n = ny + n_slack + m;
  t.a.assign(m, std::vector<double>(t.n + 1, 0.0));
  t.basis.assign(m, 0);
  t.allowed.assign(t.n, true);
  const std::size_t art0 = ny + n_slack;
  std::size_t slack = ny;
  std::vector<bool> needs_art(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = rows[i].rhs < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < ny; ++j) t.a[i][j] = sign * rows[i].coef[j];
    t.a[i][t.n] = sign * rows[i].rhs;
    if (rows[i].le) {
      t.a[i][slack] = sign;
      if (sign > 0.0) {
        t.basis[i] = slack;
      } else {
        needs_art[i] = true;
      }
      ++slack;
    } else {
      needs_art[i] = true;
    }
    if (needs_art[i]) {
      t.a[i][art0 + i] = 1.0;
      t.basis[i] = art0 + i;
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    if (!needs_art[i]) t.allowed[art0 + i] = false;

  // Phase 1
  std::vector<double> cost1(t.n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (needs_art[i]) cost1[art0 + i] = 1.0;
  t.optimize(cost1);
  double infeas = 0.0;
  double rhs_scale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    rhs_scale = std::max(rhs_scale, std::abs(rows[i].rhs));
    if (t.basis[i] >= art0) infeas += t.a[i][t.n];
  }
  if (infeas > 1e-9 * rhs_scale) return {LpStatus::infeasible, {}, kInf, false};

  // Drive remaining artificials out of the basis; drop redundant rows.
  for (std::size_t i = 0; i < t.m;) {
    if (t.basis[i] < art0) {
      ++i;
      continue;
    }
    std::size_t col = art0;
    for (std::size_t j = 0; j < art0; ++j) {
      if (std::abs(t.a[i][j]) > kPivotEps) {
        col = j;
        break;
      }
    }
    if (col < art0) {
      t.pivot(i, col);
      ++i;
    } else {
      t.a.erase(t.a.begin() + static_cast<std::ptrdiff_t>(i));
      t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
      --t.m;
    }
  }
  for (std::size_t j = art0; j < t.n; ++j) t.allowed[j] = false;

  // Phase 2
  std::vector<double> cost2(t.n, 0.0);
  std::copy(cost_y.begin(), cost_y.end(), cost2.begin());
  if (!t.optimize(cost2)) return {LpStatus::unbounded, {}, -kInf, false};

  std::vector<double> y(t.n, 0.0);
  std::vector<bool> basic(t.n, false);
  for (std::size_t i = 0; i < t.m; ++i) {
    y[t.basis[i]] = t.a[i][t.n];
    basic[t.basis[i]] = true;
  }
  LpSolution sol;
  sol.status = LpStatus::optimal;
  sol.x.assign(nv, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    double v = cmap[j].offset + cmap[j].coef * y[cmap[j].col];
    if (cmap[j].mirror != SIZE_MAX) v -= y[cmap[j].mirror];
    sol.x[j] = v;
  }
  double obj = cost_const;
  for (std::size_t j = 0; j < ny; ++j) obj += cost_y[j] * y[j];
  sol.objective = obj;

  const std::vector<double> rc = t.reduced_costs(cost2);
  std::vector<std::size_t> mirror_of(t.n, SIZE_MAX);
  for (const auto& cm : cmap) {
    if (cm.mirror != SIZE_MAX) {
      mirror_of[cm.col] = cm.mirror;
      mirror_of[cm.mirror] = cm.col;
    }
  }
  for (std::size_t j = 0; j < art0; ++j) {
    if (basic[j] || std::abs(rc[j]) > 1e-9) continue;
    if (mirror_of[j] != SIZE_MAX && basic[mirror_of[j]]) continue;
    sol.alternative_optima = true;
    break;
  }
  return sol;
}

}  // namespace rq
