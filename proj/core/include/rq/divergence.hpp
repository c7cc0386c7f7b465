#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rq/quadrangle.hpp"

namespace rq {

// Closed convex phi with phi(1) = 0 and 1 interior to its domain, paired with
// its conjugate. Density vectors are indexed like the atoms they weight.
struct DivergenceFn {
  enum class Kind { divergence, extended };  // divergence: phi = +inf on x < 0

  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> phi_conj;
  // Gradient of phi_conj: the maximizer of q z - phi(q). Empty when phi is
  // not strictly convex (total variation).
  std::function<double(double)> conj_grad;
  double dom_lo = 0.0;
  double dom_hi = kInf;
  Kind kind = Kind::divergence;
  double q = 0.5;  // level of gen_extended_pearson
};

DivergenceFn phi_kl();
DivergenceFn phi_tv();
DivergenceFn phi_pearson();
DivergenceFn phi_extended_pearson();
DivergenceFn phi_gen_extended_pearson(double q);

// Registry lookup: kl, tv, pearson, extended_pearson, gen_extended_pearson (uses q).
DivergenceFn make_phi(const std::string& name, double q = 0.5);
const std::vector<std::string>& phi_names();

// Largest sampled Fenchel-Young gap |phi*(z) - sup_x (z x - phi(x))| on a grid of z.
double conjugate_gap(const DivergenceFn& phi);

// Functional J on density vectors.
struct StochasticDivergenceJ {
  enum class Kind { divergence_root, stochastic_divergence, general };
  std::function<double(const std::vector<double>& q, const std::vector<double>& probs)> eval;
  std::string label;
};

// J(Q) = E[phi(Q)] on {Q >= 0} (root) or additionally E[Q] = 1 (stochastic).
StochasticDivergenceJ expected_phi(const DivergenceFn& phi, bool normalized);

// sum_i p_i phi(q_i), +inf when some q_i leaves the domain.
double divergence_value(const DivergenceFn& phi, const std::vector<double>& q, const std::vector<double>& probs);
double divergence_value(const StochasticDivergenceJ& j, const std::vector<double>& q,
                        const std::vector<double>& probs);

struct PerspectiveResult {
  double value = 0.0;
  double lambda = 0.0;
  bool boundary = false;  // the infimum is a limit at the lambda search edge
};

// inf over lambda > 0 of lambda [F(X / lambda) + tau], golden section in log
// lambda over [1e-8, 1e8] times the scale of X. At the small-lambda edge the
// value is the limit lambda F(X / lambda) without the vanishing tau term.
PerspectiveResult family_eval_perspective(const Functional& parent, double tau, const DiscreteRv& x);

struct EnvelopeResult {
  double value = 0.0;
  std::vector<double> density;  // maximizing Q over the atoms of x
};

// sup { E[Q X] : E[phi(Q)] <= tau, E[Q] = 1 }. Total variation is an LP;
// strictly convex phi uses the primal maximizer Q = (phi*)'((X - C)/mu) with
// C fixing E[Q] = 1 and mu bisected onto the budget.
EnvelopeResult family_eval_envelope(const DivergenceFn& phi, double tau, const DiscreteRv& x);

// Parent risk of the phi family: min_C C + E[phi*(X - C)] (closed forms for kl and tv).
Functional phi_parent_risk(const DivergenceFn& phi);

// Regret of the phi quadrangle: inf_lambda lambda {beta + E[phi*(X/lambda)]}.
PerspectiveResult phi_regret(const DivergenceFn& phi, double beta, const DiscreteRv& x);

// Quartet from the regret formula alone (no closed forms).
Quartet make_divergence_quadrangle_generic(const DivergenceFn& phi, double beta);

// Quartet with the closed forms for named phi; unnamed phi fall back to the generic path.
Quartet make_divergence_quadrangle(const DivergenceFn& phi, double beta);

// Entropic risk inf_lambda lambda (beta + ln E[e^{X/lambda}]) and its minimizer.
struct EvarResult {
  double value = 0.0;
  double lambda = 0.0;  // 0 when the infimum is the ess sup limit
  double statistic = 0.0;
};
EvarResult evar(const DiscreteRv& x, double beta);
// lambda beta + lambda ln E[e^{X/lambda}] - E[X e^{X/lambda}] / E[e^{X/lambda}].
double evar_stationarity(const DiscreteRv& x, double beta, double lambda);

// Family of the indicator regret V(X) = 0 if E[X+1]+ <= 1, else +inf:
// V_tau(X) = tau * min{lambda > 0 : E[X + lambda]+ <= lambda}.
double cvar_indicator_regret(const DiscreteRv& x);
double cvar_indicator_family(const DiscreteRv& x, double tau);

struct ClassificationReport {
  bool normalized = false;   // J(1) = 0
  bool nonnegative = false;
  bool unique_min = false;   // J > 0 at sampled perturbations of 1
  bool root_domain = false;  // finite on Q >= 0, +inf on negative entries
  bool stochastic_domain = false;  // finite only on E[Q] = 1
  StochasticDivergenceJ::Kind kind = StochasticDivergenceJ::Kind::general;
};

ClassificationReport classify_divergence(const StochasticDivergenceJ& j, std::size_t atoms = 3, int samples = 200,
                                         std::uint64_t seed = 0);

const char* to_string(StochasticDivergenceJ::Kind k);

}  // namespace rq
