#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rq/rv.hpp"
#include "rq/solvers.hpp"

namespace rq {

using Functional = std::function<double(const DiscreteRv&)>;
using StatisticFn = std::function<StatInterval(const DiscreteRv&)>;

struct Flags {
  bool positively_homogeneous = false;
  bool monotone = false;
  bool expectation_type = false;
  bool coherent = false;
};

// Closed convex scalar loss with e(0) = 0, positive somewhere on each side of
// 0. One-sided derivatives must be exact; `kinks` lists every point where
// they differ (empty for smooth losses).
struct ScalarLoss {
  std::function<double(double)> e;
  std::function<double(double)> d_left;
  std::function<double(double)> d_right;
  std::vector<double> kinks;
  std::string label;

  // v(x) = x + e(x): the regret integrand paired with e.
  ScalarLoss as_regret() const;
  double expect(const DiscreteRv& x) const { return x.expect(e); }
};

struct ErrorFn {
  Functional eval;
  Flags flags;
  std::string label;
  std::optional<ScalarLoss> loss;  // set when the error is E[e(X)]
  double operator()(const DiscreteRv& x) const { return eval(x); }
};

struct RegretFn {
  Functional eval;
  Flags flags;
  std::string label;
  std::optional<ScalarLoss> loss;  // set when the regret is E[v(X)]
  double operator()(const DiscreteRv& x) const { return eval(x); }
};

// Risk, deviation, regret, error and their shared statistic.
// Invariants: risk - deviation = E[X], regret - error = E[X].
struct Quartet {
  Functional risk;
  Functional deviation;
  Functional regret;
  Functional error;
  StatisticFn statistic;
  Flags flags;
  std::string label;
  std::optional<ScalarLoss> loss;

  ErrorFn error_fn() const { return {error, flags, label, loss}; }
  RegretFn regret_fn() const { return {regret, flags, label, loss ? std::optional(loss->as_regret()) : std::nullopt}; }
};

struct Projection {
  double value;
  StatInterval statistic;
};

// min over C of err(X - C) and the set of minimizing C.
Projection project_error(const ErrorFn& err, const DiscreteRv& x);

// min over C of C + regret(X - C) and the set of minimizing C.
Projection regret_to_risk(const RegretFn& v, const DiscreteRv& x);

// Only the minimum value of the regret formula (skips the argmin set).
double regret_to_risk_value(const Functional& v, const DiscreteRv& x);

RegretFn regret_from_error(const ErrorFn& err);
ErrorFn error_from_regret(const RegretFn& v);

// Exact one-sided derivative criterion for E[e(X - C)]:
// {C : E e'-(X-C) <= 0 <= E e'+(X-C)}.
StatInterval expectation_statistic(const ScalarLoss& loss, const DiscreteRv& x);
// Same criterion for a regret integrand: {C : E v'-(X-C) <= 1 <= E v'+(X-C)}.
StatInterval expectation_regret_statistic(const ScalarLoss& v, const DiscreteRv& x);

struct AxiomReport {
  bool ok = true;
  std::vector<std::string> failures;
  void fail(std::string what) {
    ok = false;
    failures.push_back(std::move(what));
  }
};

// Sampled subregular-error test: E(0) = 0, E >= 0, and for each sampled
// nonzero X some scale lambda gives E(lambda X) > 0.
AxiomReport check_error_axioms(const Functional& err, std::uint64_t seed = 0, int samples = 60);

// Sampled monotonicity criterion E(X) <= |E X| for X <= 0.
bool sampled_monotone_error(const Functional& err, std::uint64_t seed = 0, int samples = 200);

struct FromErrorOptions {
  std::optional<bool> monotone;  // caller-declared; sampled when empty
  bool verify = true;
  std::uint64_t seed = 0;
};

// Complete quartet generated by an error.
Quartet quadrangle_from_error(const ErrorFn& err, const FromErrorOptions& opt = {});

// Weighted combination. Weights must be positive and sum to 1.
Quartet mix_quadrangles(const std::vector<Quartet>& parts, const std::vector<double>& weights);

enum class ScaleMode { affine, perspective };
Quartet scale_quadrangle(const Quartet& q, double lambda, ScaleMode mode);

Quartet revert_quadrangles(const Quartet& q1, const Quartet& q2);

// Quartet from a scalar loss; rejects losses failing the sampled property block.
Quartet expectation_quadrangle(const ScalarLoss& loss);

// Error X -> R(|X|) from a monotone risk.
ErrorFn error_from_coherent_risk(const Functional& risk, const Flags& flags, std::string label = "R(|X|)");

// Common losses.
ScalarLoss squared_loss();
ScalarLoss koenker_bassett_loss(double alpha);         // alpha/(1-alpha) x+ + x-
ScalarLoss vapnik_loss(double eps);                    // (|x| - eps)+
ScalarLoss asymmetric_square_loss(double q);           // q x+^2 + (1-q) x-^2
ScalarLoss two_piece_linear_loss(double up, double down);  // up x+ + down x-

// Scale of a random variable for probe widths: 1 + spread.
double probe_scale(const DiscreteRv& x);

}  // namespace rq
