#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rq/catalog.hpp"
#include "rq/quadrangle.hpp"

namespace rq {

enum class FunctionalKind { error, regret, deviation, risk };
const char* to_string(FunctionalKind k);

// Dual set of a positively homogeneous functional over density vectors Q on
// fixed atoms, paired through E[QX] = sum_i p_i Q_i X_i.
//
// Polyhedral form: variables (Q, aux) with linear constraints; aux variables
// carry Minkowski sums and bound splits. Oracle form: a membership test and a
// support function.
struct Envelope {
  enum class Form { polyhedral, oracle };

  Form form = Form::polyhedral;
  std::string label;
  std::vector<double> probs;
  std::size_t aux = 0;  // extra variables after the n density entries
  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
  std::vector<std::vector<double>> a_le;
  std::vector<double> b_le;
  std::vector<double> lower;  // size n + aux; -inf allowed
  std::vector<double> upper;

  std::function<bool(const std::vector<double>& q, double tol)> contains_fn;
  std::function<double(const std::vector<double>& x)> support_fn;
  std::function<std::vector<double>(const std::vector<double>& x)> argmax_fn;

  std::size_t atoms() const { return probs.size(); }
};

struct SupportResult {
  double value = 0.0;
  std::vector<double> density;
};

// sup over the envelope of E[QX] for outcome values x on the envelope's atoms.
SupportResult envelope_support(const Envelope& env, const std::vector<double>& x);
bool envelope_contains(const Envelope& env, const std::vector<double>& q, double tol = 1e-9);

// Envelope of a positively homogeneous catalog functional on atoms with the
// given probabilities. Throws ValidationError for families without a
// positively homogeneous member of that kind or without a finite description.
Envelope envelope_extract(const CatalogSpec& spec, FunctionalKind kind, const std::vector<double>& probs);

// Envelope of an arbitrary functional as a conjugate-level oracle
// {Q : f*(Q) <= tol}. Rejects functionals failing a sampled scaling test.
Envelope envelope_from_functional(const Functional& f, const std::vector<double>& probs, std::uint64_t seed = 0);

struct ConjugateResult {
  double value = 0.0;      // best lower bound found for sup_X E[XQ] - f(X)
  bool unbounded = false;  // grows with the search box
  std::vector<double> maximizer;
};

// sup_X E[XQ] - f(X) over the box |X_i| <= box. Nested golden for up to three
// atoms, projected subgradient ascent on finite differences beyond.
ConjugateResult conjugate_eval(const Functional& f, const std::vector<double>& q, const std::vector<double>& probs,
                               double box = 10.0);

struct DualAxiomReport {
  bool center = false;      // 1 (risk, regret) or 0 (error, deviation) lies in the set
  bool hyperplane = false;  // E[Q] = 1 (risk), E[Q] = 0 (deviation); vacuous otherwise
  bool separation = false;  // sampled X admit Q with E[XQ] above the threshold
  std::vector<std::string> failures;
  bool ok() const { return center && hyperplane && separation; }
};

DualAxiomReport dual_axiom_check(const Envelope& env, FunctionalKind kind, std::uint64_t seed = 0,
                                 int samples = 40);

}  // namespace rq
