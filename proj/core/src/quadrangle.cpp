#include "rq/quadrangle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rq {

namespace {

constexpr double kZero = 1e-12;     // derivative sums within this count as zero
constexpr double kSnap = 1e-10;     // relative distance for snapping to breakpoints

// {C : E dl(X-C) <= target <= E dr(X-C)} for nonincreasing-in-C sums.
StatInterval derivative_criterion(const ScalarLoss& loss, const DiscreteRv& x, double target) {
  const double scale = probe_scale(x);
  double reach = 0.0;
  for (double k : loss.kinks) reach = std::max(reach, std::abs(k));
  auto gl = [&](double c) {
    double s = 0.0;
    for (const auto& a : x.atoms()) s += a.prob * loss.d_left(a.value - c);
    return s - target;
  };
  auto gr = [&](double c) {
    double s = 0.0;
    for (const auto& a : x.atoms()) s += a.prob * loss.d_right(a.value - c);
    return s - target;
  };
  double lo = x.min() - reach - scale;
  double hi = x.max() + reach + scale;
  for (int i = 0; i < 80 && !(gl(lo) > kZero); ++i) lo -= (hi - lo);
  for (int i = 0; i < 80 && !(gr(hi) < -kZero); ++i) hi += (hi - lo);
  if (!(gl(lo) > kZero) || !(gr(hi) < -kZero)) throw ValidationError("loss does not grow on both sides");
  // left end: first C with gl(C) <= 0; right end: last C with gr(C) >= 0
  const double left = last_nonnegative([&](double c) { return gl(c) > kZero ? 1.0 : -1.0; }, lo, hi);
  const double right = last_nonnegative([&](double c) { return gr(c) >= -kZero ? 1.0 : -1.0; }, lo, hi);
  double a = std::nextafter(left, kInf);
  double b = right;
  // snap to the nearest breakpoint x_i - kink when within rounding distance
  auto snap = [&](double c) {
    double best = c;
    double dist = kSnap * scale;
    for (const auto& at : x.atoms()) {
      auto consider = [&](double cand) {
        if (std::abs(cand - c) <= dist) {
          dist = std::abs(cand - c);
          best = cand;
        }
      };
      consider(at.value);
      for (double k : loss.kinks) consider(at.value - k);
    }
    return best;
  };
  a = snap(a);
  b = snap(b);
  if (a > b) a = b = 0.5 * (a + b);
  return {a, b};
}

double eval_shifted(const Functional& f, const DiscreteRv& x, double c) { return f(x.shift(-c)); }

Projection generic_projection(const ScalarFn& f, const DiscreteRv& x) {
  const double scale = probe_scale(x);
  const ScalarMin m = minimize_scalar_convex(f, x.min() - scale, x.max() + scale);
  if (!std::isfinite(m.value)) {
    if (m.unbounded) throw ConvergenceError("objective is unbounded below over shifts");
    throw ValidationError("error infinite on all shifts");
  }
  const StatInterval s = argmin_set(f, m, scale);
  const double v = f(s.mid());
  return {std::isfinite(v) ? std::min(v, m.value) : m.value, s};
}

std::vector<DiscreteRv> sample_batch(std::uint64_t seed, int n, double lo, double hi) {
  std::mt19937_64 rng(seed);
  SamplerOptions opt;
  opt.lo = lo;
  opt.hi = hi;
  std::vector<DiscreteRv> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(random_rv(rng, opt));
  return out;
}

}  // namespace

ScalarLoss ScalarLoss::as_regret() const {
  ScalarLoss v;
  auto e0 = e;
  auto dl = d_left;
  auto dr = d_right;
  v.e = [e0](double t) { return t + e0(t); };
  v.d_left = [dl](double t) { return 1.0 + dl(t); };
  v.d_right = [dr](double t) { return 1.0 + dr(t); };
  v.kinks = kinks;
  v.label = "x + " + label;
  return v;
}

double probe_scale(const DiscreteRv& x) { return 1.0 + (x.max() - x.min()); }

StatInterval expectation_statistic(const ScalarLoss& loss, const DiscreteRv& x) {
  return derivative_criterion(loss, x, 0.0);
}

StatInterval expectation_regret_statistic(const ScalarLoss& v, const DiscreteRv& x) {
  return derivative_criterion(v, x, 1.0);
}

Projection project_error(const ErrorFn& err, const DiscreteRv& x) {
  if (err.loss) {
    const StatInterval s = expectation_statistic(*err.loss, x);
    const double c = s.mid();
    return {x.expect([&](double v) { return err.loss->e(v - c); }), s};
  }
  return generic_projection([&](double c) { return eval_shifted(err.eval, x, c); }, x);
}

Projection regret_to_risk(const RegretFn& v, const DiscreteRv& x) {
  if (v.loss) {
    const StatInterval s = expectation_regret_statistic(*v.loss, x);
    const double c = s.mid();
    return {c + x.expect([&](double t) { return v.loss->e(t - c); }), s};
  }
  return generic_projection([&](double c) { return c + eval_shifted(v.eval, x, c); }, x);
}

double regret_to_risk_value(const Functional& v, const DiscreteRv& x) {
  const double scale = probe_scale(x);
  const ScalarMin m =
      minimize_scalar_convex([&](double c) { return c + eval_shifted(v, x, c); }, x.min() - scale, x.max() + scale);
  if (m.unbounded) throw ConvergenceError("regret formula is unbounded below");
  return m.value;
}

RegretFn regret_from_error(const ErrorFn& err) {
  auto e = err.eval;
  RegretFn v;
  v.eval = [e](const DiscreteRv& x) { return e(x) + expectation(x); };
  v.flags = err.flags;
  v.label = err.label;
  if (err.loss) v.loss = err.loss->as_regret();
  return v;
}

ErrorFn error_from_regret(const RegretFn& v) {
  auto r = v.eval;
  ErrorFn e;
  e.eval = [r](const DiscreteRv& x) { return r(x) - expectation(x); };
  e.flags = v.flags;
  e.label = v.label;
  if (v.loss) {
    // strip the identity part of v(x) = x + e(x)
    const ScalarLoss vl = *v.loss;
    ScalarLoss l;
    l.e = [f = vl.e](double t) { return f(t) - t; };
    l.d_left = [f = vl.d_left](double t) { return f(t) - 1.0; };
    l.d_right = [f = vl.d_right](double t) { return f(t) - 1.0; };
    l.kinks = vl.kinks;
    l.label = vl.label;
    e.loss = l;
  }
  return e;
}

AxiomReport check_error_axioms(const Functional& err, std::uint64_t seed, int samples) {
  AxiomReport rep;
  const double at0 = err(DiscreteRv::constant(0.0));
  if (!(std::abs(at0) <= 1e-12)) rep.fail("E1: error of zero is " + std::to_string(at0));
  const auto batch = sample_batch(seed, samples, -5.0, 5.0);
  for (const auto& x : batch) {
    const double v = err(x);
    if (v < -1e-12) {
      rep.fail("E1: negative error value " + std::to_string(v));
      break;
    }
  }
  for (const auto& x : batch) {
    if (x.is_constant() && x.value(0) == 0.0) continue;
    bool positive = false;
    for (double lam = 1e-3; lam <= 1e3 && !positive; lam *= 10.0) positive = err(x.scale(lam)) > 1e-12;
    if (!positive) {
      rep.fail("E2: error vanishes along a whole ray");
      break;
    }
  }
  return rep;
}

bool sampled_monotone_error(const Functional& err, std::uint64_t seed, int samples) {
  for (const auto& x : sample_batch(seed + 7, samples, -5.0, 0.0)) {
    if (err(x) > std::abs(expectation(x)) + 1e-9) return false;
  }
  return true;
}

Quartet quadrangle_from_error(const ErrorFn& err, const FromErrorOptions& opt) {
  if (opt.verify) {
    const AxiomReport rep = check_error_axioms(err.eval, opt.seed);
    if (!rep.ok) throw ValidationError("not a subregular error: " + rep.failures.front());
  }
  Quartet q;
  q.label = err.label;
  q.loss = err.loss;
  q.flags = err.flags;
  q.flags.expectation_type = err.loss.has_value();
  q.flags.monotone = opt.monotone ? *opt.monotone : sampled_monotone_error(err.eval, opt.seed);
  q.flags.coherent = q.flags.monotone && q.flags.positively_homogeneous;
  const ErrorFn e = err;
  const RegretFn v = regret_from_error(err);
  q.error = e.eval;
  q.regret = v.eval;
  q.deviation = [e](const DiscreteRv& x) { return project_error(e, x).value; };
  q.risk = [v](const DiscreteRv& x) { return regret_to_risk(v, x).value; };
  q.statistic = [e](const DiscreteRv& x) { return project_error(e, x).statistic; };
  return q;
}

Quartet mix_quadrangles(const std::vector<Quartet>& parts, const std::vector<double>& weights) {
  if (parts.empty() || parts.size() != weights.size()) throw ValidationError("mixing needs one weight per quartet");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ValidationError("mixing weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("mixing weights must sum to 1");
  if (parts.size() == 1) return parts.front();

  Quartet q;
  q.label = "mix(";
  q.flags.positively_homogeneous = q.flags.monotone = q.flags.coherent = true;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    q.label += (k ? ", " : "") + parts[k].label;
    q.flags.positively_homogeneous &= parts[k].flags.positively_homogeneous;
    q.flags.monotone &= parts[k].flags.monotone;
    q.flags.coherent &= parts[k].flags.coherent;
  }
  q.label += ")";
  auto weighted = [parts, weights](auto member) {
    return [parts, weights, member](const DiscreteRv& x) {
      double s = 0.0;
      for (std::size_t k = 0; k < parts.size(); ++k) s += weights[k] * (parts[k].*member)(x);
      return s;
    };
  };
  q.risk = weighted(&Quartet::risk);
  q.deviation = weighted(&Quartet::deviation);
  q.statistic = [parts, weights](const DiscreteRv& x) {
    StatInterval s = parts[0].statistic(x) * weights[0];
    for (std::size_t k = 1; k < parts.size(); ++k) s = s + parts[k].statistic(x) * weights[k];
    return s;
  };
  // min sum w_k E_k(X - C_k) over sum w_k C_k = 0; the last shift is implied
  q.error = [parts, weights](const DiscreteRv& x) {
    const std::size_t r = parts.size();
    auto objective = [&](const std::vector<double>& c) {
      double last = 0.0;
      for (std::size_t k = 0; k + 1 < r; ++k) last -= weights[k] * c[k];
      last /= weights[r - 1];
      double s = weights[r - 1] * parts[r - 1].error(x.shift(-last));
      for (std::size_t k = 0; k + 1 < r; ++k) s += weights[k] * parts[k].error(x.shift(-c[k]));
      return s;
    };
    const double reach = std::max(std::abs(x.min()), std::abs(x.max())) + probe_scale(x);
    std::vector<double> lo(r - 1, -reach), hi(r - 1, reach);
    ScalarOptions opt;
    opt.grid = r > 2 ? 17 : 65;
    return minimize_nested(objective, lo, hi, opt).value;
  };
  auto err = q.error;
  q.regret = [err](const DiscreteRv& x) { return err(x) + expectation(x); };
  return q;
}

Quartet scale_quadrangle(const Quartet& q0, double lambda, ScaleMode mode) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("scaling factor must be positive");
  Quartet q = q0;
  if (mode == ScaleMode::affine) {
    q.label = "affine(" + q0.label + ")";
    q.risk = [r = q0.risk, lambda](const DiscreteRv& x) { return (1.0 - lambda) * expectation(x) + lambda * r(x); };
    q.regret = [v = q0.regret, lambda](const DiscreteRv& x) { return (1.0 - lambda) * expectation(x) + lambda * v(x); };
    q.deviation = [d = q0.deviation, lambda](const DiscreteRv& x) { return lambda * d(x); };
    q.error = [e = q0.error, lambda](const DiscreteRv& x) { return lambda * e(x); };
    if (lambda > 1.0) q.flags.monotone = q.flags.coherent = false;
    if (q0.loss) {
      ScalarLoss l = *q0.loss;
      l.e = [f = q0.loss->e, lambda](double t) { return lambda * f(t); };
      l.d_left = [f = q0.loss->d_left, lambda](double t) { return lambda * f(t); };
      l.d_right = [f = q0.loss->d_right, lambda](double t) { return lambda * f(t); };
      q.loss = l;
    }
    return q;
  }
  q.label = "perspective(" + q0.label + ")";
  auto persp = [lambda](Functional f) {
    return [f, lambda](const DiscreteRv& x) { return lambda * f(x.scale(1.0 / lambda)); };
  };
  q.risk = persp(q0.risk);
  q.deviation = persp(q0.deviation);
  q.regret = persp(q0.regret);
  q.error = persp(q0.error);
  q.statistic = [s = q0.statistic, lambda](const DiscreteRv& x) { return s(x.scale(1.0 / lambda)) * lambda; };
  if (q0.loss) {
    ScalarLoss l = *q0.loss;
    l.e = [f = q0.loss->e, lambda](double t) { return lambda * f(t / lambda); };
    l.d_left = [f = q0.loss->d_left, lambda](double t) { return f(t / lambda); };
    l.d_right = [f = q0.loss->d_right, lambda](double t) { return f(t / lambda); };
    for (double& k : l.kinks) k *= lambda;
    q.loss = l;
  }
  return q;
}

Quartet revert_quadrangles(const Quartet& q1, const Quartet& q2) {
  Quartet q;
  q.label = "revert(" + q1.label + ", " + q2.label + ")";
  q.flags.positively_homogeneous = q1.flags.positively_homogeneous && q2.flags.positively_homogeneous;
  q.flags.monotone = false;
  q.flags.coherent = false;
  q.statistic = [s1 = q1.statistic, s2 = q2.statistic](const DiscreteRv& x) {
    return (s1(x) - s2(x.negate())) * 0.5;
  };
  q.deviation = [d1 = q1.deviation, d2 = q2.deviation](const DiscreteRv& x) {
    return 0.5 * (d1(x) + d2(x.negate()));
  };
  auto dev = q.deviation;
  q.risk = [dev](const DiscreteRv& x) { return expectation(x) + dev(x); };
  q.error = [e1 = q1.error, e2 = q2.error](const DiscreteRv& x) {
    auto f = [&](double c) { return 0.5 * (e1(x.shift(c)) + e2(x.negate().shift(c))); };
    const double scale = probe_scale(x);
    const double reach = std::max(std::abs(x.min()), std::abs(x.max())) + scale;
    return minimize_scalar_convex(f, -reach, reach).value;
  };
  auto err = q.error;
  q.regret = [err](const DiscreteRv& x) { return err(x) + expectation(x); };
  return q;
}

Quartet expectation_quadrangle(const ScalarLoss& loss) {
  if (!loss.e || !loss.d_left || !loss.d_right) throw ValidationError("loss needs e and both one-sided derivatives");
  if (std::abs(loss.e(0.0)) > 1e-12) throw ValidationError("loss property block: e(0) must be 0");
  bool pos_left = false, pos_right = false;
  for (double t = 1e-3; t <= 1e6; t *= 10.0) {
    pos_left = pos_left || loss.e(-t) > 0.0;
    pos_right = pos_right || loss.e(t) > 0.0;
  }
  if (!pos_left || !pos_right) throw ValidationError("loss property block: e must be positive on both sides of 0");
  for (double a = -20.0; a <= 20.0; a += 0.37) {
    const double b = a + 1.3;
    if (loss.e(a) < -1e-12) throw ValidationError("loss property block: e must be nonnegative");
    if (loss.e(0.5 * (a + b)) > 0.5 * (loss.e(a) + loss.e(b)) + 1e-9 * (1.0 + std::abs(loss.e(a)) + std::abs(loss.e(b))))
      throw ValidationError("loss property block: e must be convex");
    if (loss.d_left(a) > loss.d_right(a) + 1e-12) throw ValidationError("loss property block: e'- must not exceed e'+");
  }
  bool monotone = true;
  for (double t = 1e-3; t <= 100.0; t *= 1.5) monotone = monotone && loss.e(-t) <= t + 1e-12;
  bool homogeneous = true;
  const double up = loss.e(1.0), down = loss.e(-1.0);
  for (double t = 0.05; t <= 50.0; t *= 1.7) {
    homogeneous = homogeneous && std::abs(loss.e(t) - t * up) <= 1e-12 * (1.0 + t * up) &&
                  std::abs(loss.e(-t) - t * down) <= 1e-12 * (1.0 + t * down);
  }
  ErrorFn err;
  err.loss = loss;
  err.label = loss.label;
  err.flags.positively_homogeneous = homogeneous;
  err.flags.expectation_type = true;
  err.eval = [loss](const DiscreteRv& x) { return loss.expect(x); };
  FromErrorOptions opt;
  opt.verify = false;
  opt.monotone = monotone;
  return quadrangle_from_error(err, opt);
}

ErrorFn error_from_coherent_risk(const Functional& risk, const Flags& flags, std::string label) {
  if (!flags.monotone) throw ValidationError("the error R(|X|) needs a monotone risk");
  ErrorFn e;
  e.eval = [risk](const DiscreteRv& x) { return risk(x.abs()); };
  e.flags.positively_homogeneous = flags.positively_homogeneous;
  e.label = std::move(label);
  return e;
}

ScalarLoss two_piece_linear_loss(double up, double down) {
  if (!(up > 0.0) || !(down > 0.0)) throw ValidationError("two-piece slopes must be positive");
  ScalarLoss l;
  l.e = [up, down](double t) { return t > 0.0 ? up * t : -down * t; };
  l.d_left = [up, down](double t) { return t > 0.0 ? up : -down; };
  l.d_right = [up, down](double t) { return t >= 0.0 ? up : -down; };
  l.kinks = {0.0};
  l.label = "two-piece linear";
  return l;
}

ScalarLoss koenker_bassett_loss(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  ScalarLoss l = two_piece_linear_loss(alpha / (1.0 - alpha), 1.0);
  l.label = "Koenker-Bassett";
  return l;
}

ScalarLoss vapnik_loss(double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ValidationError("insensitivity must be nonnegative");
  ScalarLoss l;
  l.e = [eps](double t) { return std::max(std::abs(t) - eps, 0.0); };
  l.d_left = [eps](double t) { return t > eps ? 1.0 : (t > -eps ? 0.0 : -1.0); };
  l.d_right = [eps](double t) { return t >= eps ? 1.0 : (t >= -eps ? 0.0 : -1.0); };
  l.kinks = eps > 0.0 ? std::vector<double>{-eps, eps} : std::vector<double>{0.0};
  l.label = "Vapnik";
  return l;
}

ScalarLoss squared_loss() {
  ScalarLoss l;
  l.e = [](double t) { return t * t; };
  l.d_left = l.d_right = [](double t) { return 2.0 * t; };
  l.label = "squared";
  return l;
}

ScalarLoss asymmetric_square_loss(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("q must lie in (0,1)");
  ScalarLoss l;
  l.e = [q](double t) { return t > 0.0 ? q * t * t : (1.0 - q) * t * t; };
  l.d_left = l.d_right = [q](double t) { return t > 0.0 ? 2.0 * q * t : 2.0 * (1.0 - q) * t; };
  l.label = "asymmetric squared";
  return l;
}

}  // namespace rq
