#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "rq/rv.hpp"

namespace rq {

using ScalarFn = std::function<double(double)>;
using VectorFn = std::function<double(const std::vector<double>&)>;
using VectorMap = std::function<std::vector<double>(const std::vector<double>&)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ScalarMin {
  double argmin = 0.0;
  double value = kInf;
  bool unbounded = false;   // value decreased past the expansion cap
  bool at_edge = false;     // fixed bracket and the minimum sits on its edge
};

struct ScalarOptions {
  double tol = 1e-10;       // relative argument tolerance
  bool expand = true;       // grow the bracket while the minimum is on its edge
  double cap = 1.152921504606846976e18;  // 2^60
  int grid = 65;            // coarse grid points per bracket
};

// Convex 1-D minimization: a coarse grid locates the basin (and skips +inf
// regions), golden section refines it. f may return +inf outside its domain.
ScalarMin minimize_scalar_convex(const ScalarFn& f, double lo, double hi, const ScalarOptions& opt = {});

// Same, auto-bracketing by doubling out from [-1, 1].
ScalarMin minimize_scalar_convex(const ScalarFn& f, const ScalarOptions& opt = {});

// Full argmin set of a convex f given one minimizer. Endpoints come from
// bisection on one-sided decrease tests; a set narrower than a few probe
// widths is treated as a point and polished with a central-difference root.
// `scale` sets the probe width (1e-6 * scale).
StatInterval argmin_set(const ScalarFn& f, const ScalarMin& m, double scale);

// Exact flat bottom of a convex piecewise-linear f whose kinks are all listed
// in `breakpoints`. Throws ValidationError on a non-convex slope sequence.
StatInterval argmin_interval_pwl(std::vector<double> breakpoints, const ScalarFn& f, double tol = 1e-12);

// Bisection on a nonincreasing function: largest t in [lo, hi] with g(t) >= 0
// (returns lo if g(lo) < 0, hi if g(hi) >= 0).
double last_nonnegative(const ScalarFn& g, double lo, double hi, int iters = 200);

struct SubgradientOptions {
  int steps = 50000;
  double step0 = 0.0;       // 0 selects a step from the initial objective scale
  double tol = 0.0;         // stop once the best value stops improving by more than tol (0 disables)
};

struct SubgradientResult {
  std::vector<double> x;
  double value = kInf;
  int iterations = 0;
};

// Projected subgradient with a/sqrt(k) steps; returns the best iterate seen.
SubgradientResult minimize_subgradient(const VectorFn& f, const VectorMap& subgrad, const VectorMap& project,
                                       std::vector<double> x0, const SubgradientOptions& opt = {});

// Nested golden search for small convex problems: the outer coordinate
// minimizes the partial minimum over the remaining ones, which stays convex.
// Cost grows as (grid + golden steps)^dim; meant for dim <= 3.
struct BoxMin {
  std::vector<double> x;
  double value = kInf;
};
BoxMin minimize_nested(const VectorFn& f, const std::vector<double>& lo, const std::vector<double>& hi,
                       const ScalarOptions& opt = {});

// minimize c'x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  lower <= x <= upper
// (bounds may be infinite).
struct LpProblem {
  std::vector<double> c;
  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
  std::vector<std::vector<double>> a_le;
  std::vector<double> b_le;
  std::vector<double> lower;  // empty = all zero
  std::vector<double> upper;  // empty = all +inf
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = kInf;
  // Some nonbasic column prices out at zero: the optimum may not be unique.
  bool alternative_optima = false;
};

// Dense two-phase tableau simplex with Bland's rule.
LpSolution solve_lp(const LpProblem& p);

const char* to_string(LpStatus s);

}  // namespace rq
