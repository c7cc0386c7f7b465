#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rq/catalog.hpp"
#include "rq/quadrangle.hpp"

namespace rq {

// Rows are observations. Empty weights mean equal weights.
struct Dataset {
  std::vector<std::vector<double>> features;
  std::vector<double> target;
  std::vector<double> weights;

  std::size_t rows() const { return target.size(); }
  std::size_t regressors() const { return features.empty() ? 0 : features.front().size(); }
  std::vector<double> probs() const;
  void validate() const;
};

struct FitResult {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double objective = 0.0;
  DiscreteRv residual_rv = DiscreteRv::constant(0.0);
  StatInterval statistic_of_residual;
  bool non_unique = false;  // a zero reduced cost signals other optimal fits
  double gap = 0.0;         // reported optimality gap for iterative solves
  std::string method;
};

// Errors of linear residuals that an LP minimizes exactly:
//   E(Z) = max_k { E[up_k (Z - tube)+ + down_k (-Z - tube)+] + offset_k }.
// Negative coefficients are allowed when tube = 0.
struct PlPiece {
  double up = 0.0;
  double down = 0.0;
  double offset = 0.0;
};
struct PlForm {
  std::vector<PlPiece> pieces;
  double tube = 0.0;
};

// LP description of a catalog error when one exists.
std::optional<PlForm> pl_form(const CatalogSpec& spec);

// Residuals Y - c0 - sum_j c_j X_j as a random variable.
DiscreteRv residuals(const Dataset& d, double intercept, const std::vector<double>& coef);

FitResult fit_pl(const PlForm& form, const Dataset& d);
FitResult fit_least_squares(const Dataset& d);
FitResult fit_expectile_mse(double q, const Dataset& d);

// Minimizes err over affine predictors. Piecewise-linear errors with a known
// LP form should go through fit_pl; this entry handles black-box errors by
// nested golden search (up to two regressors) or multi-start subgradient.
FitResult fit_linear(const ErrorFn& err, const Dataset& d, std::uint64_t seed = 0);

// Catalog fit: LP where available, closed-form solvers otherwise.
FitResult fit_catalog(const CatalogSpec& spec, const Dataset& d, std::uint64_t seed = 0);

// Named estimators.
enum class NamedModel { quantile, expectile_pl, expectile_mse, svr, mean_pl, biased_mean };
struct NamedSpec {
  NamedModel model = NamedModel::quantile;
  double param = 0.5;  // alpha, K, q, eps or x; unused for mean_pl
};
NamedModel parse_named_model(const std::string& name);
CatalogSpec to_catalog(const NamedSpec& s);
FitResult fit_named(const NamedSpec& s, const Dataset& d);

struct EquivalenceReport {
  double error_objective = 0.0;      // min E(Z_f)
  double deviation_objective = 0.0;  // min D(Z_f) subject to 0 in S(Z_f)
  double gap = 0.0;
  bool statistic_contains_zero = false;
};

// Solves the constrained deviation form separately: slopes minimize the
// quartet's deviation, the intercept then moves 0 into the residual statistic.
EquivalenceReport regression_equivalence_check(const Quartet& quartet, const FitResult& unconstrained,
                                               const Dataset& d);

// 0 in S(residual) within tol.
bool track_statistic(const FitResult& fit, const Quartet& quartet, double tol = 1e-7);

struct SvcResult {
  std::vector<double> direction;
  double intercept = 0.0;
  double objective = 0.0;
  double gap = 0.0;
};

// min over ||w|| <= 1, w0 of CVaR_alpha(-Y (w'x + w0)) via the regret formula.
// alpha = 0 selects the plain mean of the margin loss.
SvcResult nu_svc(double alpha, const Dataset& d, std::uint64_t seed = 0);

}  // namespace rq
