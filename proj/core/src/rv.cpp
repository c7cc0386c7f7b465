#include "rq/rv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rq {

namespace {

constexpr double kNormalizeSlack = 1e-9;
constexpr double kLevelTol = 1e-12;

std::vector<Atom> canonicalize(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ValidationError("random variable needs at least one atom");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& a = atoms[i];
    if (!std::isfinite(a.value)) throw ValidationError("atom " + std::to_string(i) + ": value is not finite");
    if (!std::isfinite(a.prob) || a.prob < 0.0)
      throw ValidationError("atom " + std::to_string(i) + ": probability must be a finite nonnegative number");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > kNormalizeSlack)
    throw ValidationError("probabilities sum to " + std::to_string(total) + ", expected 1");
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) {
    if (a.prob == 0.0) continue;
    if (!out.empty() && out.back().value == a.value)
      out.back().prob += a.prob;
    else
      out.push_back({a.value, a.prob});
  }
  if (out.empty()) throw ValidationError("all atoms have zero probability");
  double s = 0.0;
  for (const auto& a : out) s += a.prob;
  for (auto& a : out) a.prob /= s;
  return out;
}

}  // namespace

StatInterval::StatInterval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ValidationError("interval endpoints must be finite");
  if (lo > hi) throw ValidationError("interval lower end exceeds upper end");
}

StatInterval StatInterval::operator*(double s) const {
  return s >= 0.0 ? StatInterval{lo_ * s, hi_ * s} : StatInterval{hi_ * s, lo_ * s};
}

StatInterval StatInterval::hull(const StatInterval& o) const {
  return {std::min(lo_, o.lo_), std::max(hi_, o.hi_)};
}

double StatInterval::distance(const StatInterval& o) const {
  return std::max(std::abs(lo_ - o.lo_), std::abs(hi_ - o.hi_));
}

DiscreteRv::DiscreteRv(const std::vector<double>& values, const std::vector<double>& probs) {
  if (values.size() != probs.size()) throw ValidationError("values and probabilities differ in length");
  std::vector<Atom> atoms(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) atoms[i] = {values[i], probs[i]};
  atoms_ = canonicalize(std::move(atoms));
}

DiscreteRv::DiscreteRv(std::vector<Atom> atoms) : atoms_(canonicalize(std::move(atoms))) {}

DiscreteRv DiscreteRv::uniform(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("random variable needs at least one atom");
  return DiscreteRv(values, std::vector<double>(values.size(), 1.0 / static_cast<double>(values.size())));
}

DiscreteRv DiscreteRv::constant(double c) { return DiscreteRv({c}, {1.0}); }

std::vector<double> DiscreteRv::values() const {
  std::vector<double> v(atoms_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = atoms_[i].value;
  return v;
}

std::vector<double> DiscreteRv::probs() const {
  std::vector<double> p(atoms_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = atoms_[i].prob;
  return p;
}

DiscreteRv DiscreteRv::map(const std::function<double(double)>& f) const {
  std::vector<Atom> out(atoms_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {f(atoms_[i].value), atoms_[i].prob};
  return DiscreteRv(std::move(out));
}

DiscreteRv DiscreteRv::shift(double c) const {
  return map([c](double v) { return v + c; });
}

DiscreteRv DiscreteRv::scale(double s) const {
  return map([s](double v) { return v * s; });
}

DiscreteRv DiscreteRv::abs() const {
  return map([](double v) { return std::abs(v); });
}

double DiscreteRv::expect(const std::function<double(double)>& g) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.prob * g(a.value);
  return s;
}

double expectation(const DiscreteRv& x) {
  if (x.is_constant()) return x.value(0);
  double s = 0.0;
  for (const auto& a : x.atoms()) s += a.prob * a.value;
  return s;
}

double variance(const DiscreteRv& x) {
  const double m = expectation(x);
  return x.expect([m](double v) { return (v - m) * (v - m); });
}

double stddev(const DiscreteRv& x) { return std::sqrt(variance(x)); }

double positive_mean(const DiscreteRv& x) {
  return x.expect([](double v) { return v > 0.0 ? v : 0.0; });
}

double negative_mean(const DiscreteRv& x) {
  return x.expect([](double v) { return v < 0.0 ? -v : 0.0; });
}

double p_norm(const DiscreteRv& x, double p) {
  if (!(p >= 1.0)) throw ValidationError("p-norm requires p >= 1");
  if (std::isinf(p)) return std::max(std::abs(x.min()), std::abs(x.max()));
  if (p == 1.0) return x.expect([](double v) { return std::abs(v); });
  if (p == 2.0) return std::sqrt(x.expect([](double v) { return v * v; }));
  const double m = std::max(std::abs(x.min()), std::abs(x.max()));
  if (m == 0.0) return 0.0;
  // factor out the largest magnitude to keep |v/m|^p in range
  return m * std::pow(x.expect([m, p](double v) { return std::pow(std::abs(v) / m, p); }), 1.0 / p);
}

std::pair<double, double> ess_bounds(const DiscreteRv& x) { return {x.min(), x.max()}; }

StatInterval quantile_interval(const DiscreteRv& x, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("quantile level must lie in (0,1)");
  double cdf = 0.0;
  double lo = x.max();
  double hi = x.max();
  bool have_lo = false;
  for (const auto& a : x.atoms()) {
    cdf += a.prob;
    if (!have_lo && cdf >= alpha - kLevelTol) {
      lo = a.value;
      have_lo = true;
    }
    if (cdf > alpha + kLevelTol) {
      hi = a.value;
      break;
    }
  }
  return {lo, hi};
}

double cvar_direct(const DiscreteRv& x, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("CVaR level must lie in [0,1)");
  if (alpha == 0.0) return expectation(x);
  const double need = 1.0 - alpha;
  double left = need;
  double acc = 0.0;
  const auto& at = x.atoms();
  for (std::size_t k = at.size(); k-- > 0 && left > 0.0;) {
    const double take = std::min(at[k].prob, left);
    acc += take * at[k].value;
    left -= take;
  }
  return acc / need;
}

DiscreteRv with_values(const DiscreteRv& x, const std::vector<double>& values) {
  if (values.size() != x.size()) throw ValidationError("value vector does not match atom count");
  std::vector<Atom> out(values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {values[i], x.prob(i)};
  return DiscreteRv(std::move(out));
}

DiscreteRv random_rv(std::mt19937_64& rng, const SamplerOptions& opt) {
  std::uniform_int_distribution<std::size_t> count(1, std::max<std::size_t>(1, opt.max_atoms));
  std::uniform_real_distribution<double> val(opt.lo, opt.hi);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  const std::size_t n = count(rng);
  std::vector<double> v(n), p(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = val(rng);
    if (opt.lattice > 0.0) z = std::round(z / opt.lattice) * opt.lattice;
    v[i] = z;
    p[i] = opt.uniform_probs ? 1.0 : w(rng);
    total += p[i];
  }
  for (auto& pi : p) pi /= total;
  return DiscreteRv(v, p);
}

}  // namespace rq
