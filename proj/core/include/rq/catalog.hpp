#pragma once

#include <map>
#include <string>
#include <vector>

#include "rq/quadrangle.hpp"

namespace rq {

enum class Family {
  standard_mean,
  quantile,
  cvar2,
  qsa,
  qsau,
  expectile_mse,
  expectile_pl,
  mean_pl,
  biased_mean,
};

// Family plus its parameters. Unused parameters are ignored.
struct CatalogSpec {
  Family family = Family::quantile;
  double lambda = 1.0;  // standard_mean scale
  double alpha = 0.5;   // quantile, cvar2, qsa
  double eps = 0.0;     // qsau insensitivity
  double q = 0.5;       // expectile_mse level
  double k = 1.0;       // expectile_pl parameter
  double x = 0.0;       // biased_mean offset
};

const std::vector<Family>& all_families();
std::string family_name(Family f);
Family parse_family(const std::string& name);

// Quartet with the closed-form functionals of the chosen family.
Quartet make_catalog_quadrangle(const CatalogSpec& spec);

// Root of q E(X-C)+ = (1-q) E(X-C)-, exact on the piecewise-linear balance.
double expectile_value(const DiscreteRv& x, double q);

// q in (1/2, 1) matching K > 0 through K = (1-q)/(2q-1).
double expectile_level_from_k(double k);

// Exact integral of CVaR_beta(X) over beta in [from, 1].
double cvar_integral(const DiscreteRv& x, double from);
// Exact integral of max(CVaR_beta(X), 0) over beta in [0, 1].
double cvar_positive_integral(const DiscreteRv& x);

// Levels alpha in [0,1) at which eps lies in the half-spread of the
// symmetric quantile pair, as a list of closed intervals.
std::vector<StatInterval> alpha_set(const DiscreteRv& x, double eps);

// Union of symmetric-quantile midpoints over alpha_set, merged into
// disjoint closed intervals.
std::vector<StatInterval> qsau_statistic_union(const DiscreteRv& x, double eps);

// Symmetric-average risk at level alpha: the risk of the qsa family.
double symmetric_cvar_risk(const DiscreteRv& x, double alpha);

}  // namespace rq
