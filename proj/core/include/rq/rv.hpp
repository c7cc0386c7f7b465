#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rq {

// Bad input: parameters out of range, malformed data, violated preconditions.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numerical search ran out of budget or failed to certify its answer.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Closed bounded interval [lo, hi] with finite endpoints.
class StatInterval {
 public:
  StatInterval() = default;
  StatInterval(double lo, double hi);
  static StatInterval point(double c) { return {c, c}; }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return hi_ - lo_; }
  double mid() const { return 0.5 * (lo_ + hi_); }
  bool is_point() const { return lo_ == hi_; }
  bool contains(double c, double tol = 0.0) const { return c >= lo_ - tol && c <= hi_ + tol; }

  // Minkowski sum / difference: [a,b] - [c,d] = [a-d, b-c].
  StatInterval operator+(const StatInterval& o) const { return {lo_ + o.lo_, hi_ + o.hi_}; }
  StatInterval operator-(const StatInterval& o) const { return {lo_ - o.hi_, hi_ - o.lo_}; }
  StatInterval operator+(double c) const { return {lo_ + c, hi_ + c}; }
  StatInterval operator-(double c) const { return {lo_ - c, hi_ - c}; }
  StatInterval operator*(double s) const;
  StatInterval hull(const StatInterval& o) const;

  // Max endpoint distance.
  double distance(const StatInterval& o) const;

  bool operator==(const StatInterval&) const = default;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

struct Atom {
  double value;
  double prob;
};

// Finite discrete random variable. Atoms are sorted ascending, carry strictly
// positive probability, and no two share a value. Immutable after construction.
class DiscreteRv {
 public:
  DiscreteRv(const std::vector<double>& values, const std::vector<double>& probs);
  explicit DiscreteRv(std::vector<Atom> atoms);

  static DiscreteRv uniform(const std::vector<double>& values);
  static DiscreteRv constant(double c);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double value(std::size_t i) const { return atoms_[i].value; }
  double prob(std::size_t i) const { return atoms_[i].prob; }
  std::vector<double> values() const;
  std::vector<double> probs() const;
  bool is_constant() const { return atoms_.size() == 1; }
  double min() const { return atoms_.front().value; }
  double max() const { return atoms_.back().value; }

  // Pointwise transforms; the result is re-canonicalized.
  DiscreteRv map(const std::function<double(double)>& f) const;
  DiscreteRv shift(double c) const;
  DiscreteRv scale(double s) const;
  DiscreteRv negate() const { return scale(-1.0); }
  DiscreteRv abs() const;

  // Probability-weighted sum of g(value).
  double expect(const std::function<double(double)>& g) const;

 private:
  std::vector<Atom> atoms_;
};

double expectation(const DiscreteRv& x);
double variance(const DiscreteRv& x);
double stddev(const DiscreteRv& x);
double positive_mean(const DiscreteRv& x);  // E[max(X,0)]
double negative_mean(const DiscreteRv& x);  // E[max(-X,0)]

// (E|X|^p)^(1/p); p = +infinity gives max |value|. Requires p >= 1.
double p_norm(const DiscreteRv& x, double p);

std::pair<double, double> ess_bounds(const DiscreteRv& x);

// [q-, q+] at level alpha in (0,1), by one CDF scan.
StatInterval quantile_interval(const DiscreteRv& x, double alpha);

// Tail average of the quantile function over (alpha, 1), alpha in [0,1).
// Atom mass is split at the level so the result is continuous in alpha.
double cvar_direct(const DiscreteRv& x, double alpha);

// Rebuild x on the same probabilities with new values (same order as x.atoms()).
DiscreteRv with_values(const DiscreteRv& x, const std::vector<double>& values);

struct SamplerOptions {
  std::size_t max_atoms = 8;
  double lo = -5.0;
  double hi = 5.0;
  // Values on a grid of this step (0 = continuous); grids create ties and flats.
  double lattice = 0.0;
  bool uniform_probs = false;
};

// Random nonconstant-or-constant r.v. for property sweeps.
DiscreteRv random_rv(std::mt19937_64& rng, const SamplerOptions& opt = {});

}  // namespace rq
