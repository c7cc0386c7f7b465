#pragma once
// Reference computations for tests. Each one takes a different route from
// the library code it checks: enumeration, sorting, bisection or grids.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rq/rq.hpp"

namespace oracle {

inline double mean(const rq::DiscreteRv& x) {
  double s = 0.0;
  for (const auto& a : x.atoms()) s += a.value * a.prob;
  return s;
}

inline double variance(const rq::DiscreteRv& x) {
  const double m = mean(x);
  double s = 0.0;
  for (const auto& a : x.atoms()) s += (a.value - m) * (a.value - m) * a.prob;
  return s;
}

// min over C of C + E[X - C]+ / (1 - alpha); the minimum of this convex
// piecewise-linear function sits at an atom.
inline double cvar(const rq::DiscreteRv& x, double alpha) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : x.atoms()) {
    double tail = 0.0;
    for (const auto& a : x.atoms()) tail += a.prob * std::max(a.value - c.value, 0.0);
    best = std::min(best, c.value + tail / (1.0 - alpha));
  }
  return best;
}

// [q-, q+] from cumulative sums: q- = min{v : F(v) >= a}, q+ = min{v : F(v) > a}.
inline std::pair<double, double> quantile(const rq::DiscreteRv& x, double alpha) {
  double cdf = 0.0;
  double lo = x.max(), hi = x.max();
  bool have_lo = false;
  for (const auto& a : x.atoms()) {
    cdf += a.prob;
    if (!have_lo && cdf >= alpha - 1e-12) lo = a.value, have_lo = true;
    if (cdf > alpha + 1e-12) {
      hi = a.value;
      break;
    }
  }
  return {lo, hi};
}

// Root of q E(X-C)+ = (1-q) E(X-C)- by bisection.
inline double expectile(const rq::DiscreteRv& x, double q) {
  double lo = x.min(), hi = x.max();
  for (int i = 0; i < 200; ++i) {
    const double c = 0.5 * (lo + hi);
    double g = 0.0;
    for (const auto& a : x.atoms()) g += a.prob * (q * std::max(a.value - c, 0.0) - (1 - q) * std::max(c - a.value, 0.0));
    (g > 0 ? lo : hi) = c;
  }
  return 0.5 * (lo + hi);
}

// sup of sum_i w_i x_i over a 1/res grid of the probability simplex on three
// atoms, restricted to densities Q = w / p inside the budget.
inline double simplex_grid_sup(const rq::DiscreteRv& x, const std::function<double(const std::vector<double>&)>& j,
                               double tau, int res = 200) {
  const auto v = x.values(), p = x.probs();
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a <= res; ++a)
    for (int b = 0; a + b <= res; ++b) {
      const double w[3] = {double(a) / res, double(b) / res, double(res - a - b) / res};
      std::vector<double> q = {w[0] / p[0], w[1] / p[1], w[2] / p[2]};
      if (j(q) > tau) continue;
      best = std::max(best, w[0] * v[0] + w[1] * v[1] + w[2] * v[2]);
    }
  return best;
}

// min c'x over {A x <= b} by enumerating every basis of n tight rows.
// Returns +inf when no vertex is feasible. Requires a bounded polytope.
inline double lp_by_vertices(const std::vector<double>& c, const std::vector<std::vector<double>>& a,
                             const std::vector<double>& b) {
  const std::size_t n = c.size(), m = a.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(m, 0);
  std::fill(pick.end() - static_cast<std::ptrdiff_t>(n), pick.end(), 1);
  do {
    Eigen::MatrixXd mat(n, n);
    Eigen::VectorXd rhs(n);
    std::size_t r = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (pick[i]) {
        for (std::size_t k = 0; k < n; ++k) mat(r, k) = a[i][k];
        rhs(r++) = b[i];
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd x = lu.solve(rhs);
    bool feasible = true;
    for (std::size_t i = 0; i < m && feasible; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += a[i][k] * x(k);
      feasible = s <= b[i] + 1e-9;
    }
    if (!feasible) continue;
    double obj = 0.0;
    for (std::size_t k = 0; k < n; ++k) obj += c[k] * x(k);
    best = std::min(best, obj);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

// Random r.v. on atoms drawn from [lo, hi] with Dirichlet-like weights.
inline rq::DiscreteRv sample(std::mt19937_64& rng, std::size_t atoms, double lo = -5.0, double hi = 5.0) {
  std::uniform_real_distribution<double> u(lo, hi), w(0.05, 1.0);
  std::vector<double> v(atoms), p(atoms);
  double s = 0.0;
  for (std::size_t i = 0; i < atoms; ++i) v[i] = u(rng), p[i] = w(rng), s += p[i];
  for (double& pi : p) pi /= s;
  return {v, p};
}

}  // namespace oracle
