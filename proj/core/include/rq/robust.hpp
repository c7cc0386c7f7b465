#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rq/divergence.hpp"
#include "rq/quadrangle.hpp"

namespace rq {

// Joint scenarios: rows are atoms (weighted by probs, uniform when empty),
// columns are assets. The loss of weights w is -w'r.
struct ScenarioSet {
  std::vector<std::vector<double>> returns;
  std::vector<double> probs;

  std::size_t scenarios() const { return returns.size(); }
  std::size_t assets() const { return returns.empty() ? 0 : returns.front().size(); }
  std::vector<double> weights() const;
  void validate() const;
  DiscreteRv loss(const std::vector<double>& w) const;
};

enum class PortfolioStatus { optimal, infeasible };
const char* to_string(PortfolioStatus s);

struct PortfolioResult {
  PortfolioStatus status = PortfolioStatus::optimal;
  std::vector<double> weights;
  double risk = kInf;
  std::string method;
};

// min over the simplex (plus E[w'r] = target) of risk(-w'r). Nested golden
// for up to three assets, projected subgradient beyond (no target allowed).
PortfolioResult portfolio_optimize(const Functional& risk, const ScenarioSet& s,
                                   std::optional<double> target_mean = std::nullopt);

// CVaR_alpha portfolio through the regret-formula LP.
PortfolioResult portfolio_cvar_lp(double alpha, const ScenarioSet& s, std::optional<double> target_mean = std::nullopt);

struct DroProblem {
  ScenarioSet scenarios;
  std::optional<double> target_mean;
  DivergenceFn phi;
  double tau = 0.1;
};

struct DroResult {
  PortfolioStatus status = PortfolioStatus::optimal;
  std::vector<double> weights;
  double value = kInf;           // regret form min_C C + V_tau(loss - C)
  double envelope_value = kInf;  // sup over the divergence ball at the same weights
  std::vector<double> worst_case_density;  // per scenario
  bool approximate_density = false;
};

DroResult dro_solve(const DroProblem& p);

// Regret kernel for epi-regularization with its conjugate on density vectors.
struct EpiKernel {
  std::string name;
  Functional regret;
  std::function<double(const std::vector<double>& q, const std::vector<double>& probs)> conj;
};
EpiKernel quadratic_kernel(double c);  // E[X] + c/2 E[X^2]
EpiKernel l2_kernel(double c);         // E[X] + c ||X||_2
EpiKernel kl_kernel();                 // E[e^X - 1]

struct EpiSpec {
  Functional base;  // risk (epi_risk_*) or regret (epi_regret)
  EpiKernel kernel;
  double epsilon = 1.0;
  // Dual of the base risk as {lo <= Q <= hi, E[Q] = 1}; needed by epi_risk_dual.
  std::optional<std::pair<double, double>> dual_box;
};

EpiSpec cvar_epi_spec(double alpha, EpiKernel kernel, double epsilon);

// inf_Y base(X - Y) + kernel(eps Y)/eps over atom vectors Y. The result is
// floored at E[X], a bound every subregular base and kernel satisfy.
double epi_risk_primal(const EpiSpec& spec, const DiscreteRv& x);
double epi_regret(const EpiSpec& spec, const DiscreteRv& x);

// sup over the base dual box of E[QX] - kernel*(Q)/eps; up to four atoms.
double epi_risk_dual(const EpiSpec& spec, const DiscreteRv& x);

// sup over lo <= Q <= hi of E[QX] - E[phi(Q)]/eps, solved atom by atom.
double epi_regret_divroot(double lo, double hi, const DivergenceFn& phi, double epsilon, const DiscreteRv& x);

}  // namespace rq
