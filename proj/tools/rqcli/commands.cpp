#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "cli.hpp"

namespace rqcli {

using rq::ValidationError;

namespace {

const std::vector<double> kDefaultTaus = {1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6};
const std::vector<double> kDefaultEpsilons = {0.1, 0.5, 1.0, 2.0, 10.0};

// Spec from --spec, then --family/--phi, then the numeric flags.
SpecInput resolve_spec(const RunConfig& cfg) {
  SpecInput s = cfg.spec.empty() ? SpecInput{} : parse_spec(cfg.spec);
  if (cfg.family) s.family = cfg.family, s.phi.reset();
  if (cfg.phi) s.phi = cfg.phi, s.family.reset();
  for (const auto& [k, v] : cfg.overrides) {
    if (k == "tau") s.tau = v;
    else if (k == "epsilon") s.epsilon = v;
    else s.params[k] = v;
  }
  return s;
}

double param_or(const SpecInput& s, const std::string& key, double fallback) {
  const auto it = s.params.find(key);
  return it == s.params.end() ? fallback : it->second;
}

rq::DivergenceFn phi_of(const SpecInput& s) {
  if (!s.phi) throw ValidationError("this command needs a phi divergence (--phi or spec field phi)");
  return rq::make_phi(*s.phi, param_or(s, "q", 0.5));
}

// Catalog quartet, or the phi quadrangle at level beta.
rq::Quartet quartet_of(const SpecInput& s) {
  if (s.family) return rq::make_catalog_quadrangle(catalog_spec(s));
  if (s.phi) return rq::make_divergence_quadrangle(phi_of(s), param_or(s, "beta", s.tau.value_or(1.0)));
  throw ValidationError("no quadrangle selected (--family, --phi or --spec)");
}

Json spec_json(const SpecInput& s) {
  Json j;
  if (s.family) j["family"] = *s.family;
  if (s.phi) j["phi"] = *s.phi;
  Json params = Json::object();
  for (const auto& [k, v] : s.params) params[k] = num(v);
  j["params"] = params;
  if (s.tau) j["tau"] = num(*s.tau);
  if (s.epsilon) j["epsilon"] = num(*s.epsilon);
  return j;
}

Json interval(const rq::StatInterval& i) { return Json::array({num(i.lo()), num(i.hi())}); }

Json vec(const std::vector<double>& v) {
  Json j = Json::array();
  for (double x : v) j.push_back(num(x));
  return j;
}

Json flags_json(const rq::Flags& f) {
  return {{"positively_homogeneous", f.positively_homogeneous},
          {"monotone", f.monotone},
          {"expectation_type", f.expectation_type},
          {"coherent", f.coherent}};
}

Json header(const RunConfig& cfg, const char* command) {
  Json j;
  j["command"] = command;
  j["tol"] = num(cfg.tol);
  return j;
}

void note_ingest(RunResult& out, const std::string& path, const IngestInfo& info) {
  out.log.push_back("read " + std::to_string(info.rows) + " rows from " + path + "; probability sum delta " +
                    fmt_num(info.normalization_delta));
}

rq::DiscreteRv load_rv(const RunConfig& cfg, RunResult& out) {
  if (cfg.input.empty()) throw ValidationError("--input is required");
  IngestInfo info;
  auto x = ingest_rv_csv(cfg.input, &info);
  note_ingest(out, cfg.input, info);
  return x;
}

Json cmd_eval(const RunConfig& cfg, RunResult& out) {
  const auto x = load_rv(cfg, out);
  const auto s = resolve_spec(cfg);
  const auto q = quartet_of(s);
  Json r = header(cfg, "eval");
  r["spec"] = spec_json(s);
  r["atoms"] = x.size();
  r["mean"] = num(rq::expectation(x));
  r["risk"] = num(q.risk(x));
  r["deviation"] = num(q.deviation(x));
  r["regret"] = num(q.regret(x));
  r["error"] = num(q.error(x));
  r["statistic"] = interval(q.statistic(x));
  r["flags"] = flags_json(q.flags);
  return r;
}

Json cmd_statistic(const RunConfig& cfg, RunResult& out) {
  const auto x = load_rv(cfg, out);
  const auto s = resolve_spec(cfg);
  const auto q = quartet_of(s);
  const auto closed = q.statistic(x);
  const auto proj = rq::project_error(q.error_fn(), x).statistic;
  const auto regret = rq::regret_to_risk(q.regret_fn(), x).statistic;
  Json r = header(cfg, "statistic");
  r["spec"] = spec_json(s);
  r["statistic"] = interval(closed);
  r["error_projection"] = interval(proj);
  r["regret_formula"] = interval(regret);
  const double gap = std::max(closed.distance(proj), closed.distance(regret));
  r["route_gap"] = num(gap);
  r["routes_agree"] = gap <= cfg.tol;
  if (s.family && rq::parse_family(*s.family) == rq::Family::qsau) {
    const double eps = catalog_spec(s).eps;
    Json u = Json::array(), a = Json::array();
    for (const auto& i : rq::qsau_statistic_union(x, eps)) u.push_back(interval(i));
    for (const auto& i : rq::alpha_set(x, eps)) a.push_back(interval(i));
    r["quantile_average_union"] = u;
    r["alpha_set"] = a;
  }
  return r;
}

rq::FunctionalKind parse_kind(const std::string& k) {
  if (k == "risk") return rq::FunctionalKind::risk;
  if (k == "deviation") return rq::FunctionalKind::deviation;
  if (k == "regret") return rq::FunctionalKind::regret;
  if (k == "error") return rq::FunctionalKind::error;
  throw ValidationError("unknown functional kind '" + k + "'");
}

const rq::Functional& pick(const rq::Quartet& q, rq::FunctionalKind k) {
  switch (k) {
    case rq::FunctionalKind::risk: return q.risk;
    case rq::FunctionalKind::deviation: return q.deviation;
    case rq::FunctionalKind::regret: return q.regret;
    case rq::FunctionalKind::error: return q.error;
  }
  return q.risk;
}

Json cmd_envelope(const RunConfig& cfg, RunResult& out) {
  const auto x = load_rv(cfg, out);
  const auto s = resolve_spec(cfg);
  const auto kind = parse_kind(cfg.kind);
  Json r = header(cfg, "envelope");
  r["spec"] = spec_json(s);
  r["kind"] = cfg.kind;
  if (s.phi) {
    if (kind != rq::FunctionalKind::risk) throw ValidationError("divergence balls describe risks only");
    const double tau = s.tau.value_or(param_or(s, "beta", 1.0));
    const auto env = rq::family_eval_envelope(phi_of(s), tau, x);
    const auto per = rq::family_eval_perspective(rq::phi_parent_risk(phi_of(s)), tau, x);
    r["form"] = "divergence_ball";
    r["support"] = num(env.value);
    r["primal"] = num(per.value);
    r["gap"] = num(std::abs(env.value - per.value));
    r["density"] = vec(env.density);
    return r;
  }
  const auto spec = catalog_spec(s);
  const auto q = rq::make_catalog_quadrangle(spec);
  rq::Envelope env;
  try {
    env = rq::envelope_extract(spec, kind, x.probs());
  } catch (const ValidationError& e) {
    if (!q.flags.positively_homogeneous) throw;
    out.log.push_back(std::string("no polyhedral envelope (") + e.what() + "); using the conjugate oracle");
    env = rq::envelope_from_functional(pick(q, kind), x.probs(), cfg.seed);
  }
  const auto sup = rq::envelope_support(env, x.values());
  const double primal = pick(q, kind)(x);
  r["form"] = env.form == rq::Envelope::Form::polyhedral ? "polyhedral" : "oracle";
  r["label"] = env.label;
  r["support"] = num(sup.value);
  r["primal"] = num(primal);
  r["gap"] = num(std::abs(sup.value - primal));
  r["density"] = vec(sup.density);
  const auto ax = rq::dual_axiom_check(env, kind, cfg.seed);
  r["axioms"] = {{"center", ax.center}, {"hyperplane", ax.hyperplane}, {"separation", ax.separation}};
  return r;
}

Json cmd_family(const RunConfig& cfg, RunResult& out) {
  const auto x = load_rv(cfg, out);
  const auto s = resolve_spec(cfg);
  const auto phi = phi_of(s);
  const auto parent = rq::phi_parent_risk(phi);
  const auto& taus = cfg.sweep.empty() ? kDefaultTaus : cfg.sweep;
  Json r = header(cfg, "family");
  r["spec"] = spec_json(s);
  r["mean"] = num(rq::expectation(x));
  r["ess_sup"] = num(x.max());
  Json rows = Json::array();
  for (double tau : taus) {
    const auto per = rq::family_eval_perspective(parent, tau, x);
    Json row = {{"tau", num(tau)}, {"perspective", num(per.value)}, {"lambda", num(per.lambda)},
                {"boundary", per.boundary}};
    try {
      row["envelope"] = num(rq::family_eval_envelope(phi, tau, x).value);
    } catch (const ValidationError&) {
      row["envelope"] = nullptr;
    }
    rows.push_back(row);
  }
  r["rows"] = rows;
  return r;
}

Json fit_json(const rq::FitResult& f) {
  Json j;
  j["method"] = f.method;
  j["intercept"] = num(f.intercept);
  j["coefficients"] = vec(f.coefficients);
  j["objective"] = num(f.objective);
  j["residual_statistic"] = interval(f.statistic_of_residual);
  j["non_unique"] = f.non_unique;
  j["gap"] = num(f.gap);
  return j;
}

Json cmd_regress(const RunConfig& cfg, RunResult& out) {
  if (cfg.input.empty()) throw ValidationError("--input is required");
  IngestInfo info;
  const auto d = ingest_dataset_csv(cfg.input, &info);
  note_ingest(out, cfg.input, info);
  Json r = header(cfg, "regress");
  rq::CatalogSpec spec;
  rq::FitResult fit;
  if (!cfg.model.empty()) {
    rq::NamedSpec named{rq::parse_named_model(cfg.model), 0.5};
    if (named.model != rq::NamedModel::mean_pl) {
      if (!cfg.param) throw ValidationError("model '" + cfg.model + "' needs --param");
      named.param = *cfg.param;
    }
    spec = rq::to_catalog(named);
    fit = rq::fit_named(named, d);
    r["model"] = cfg.model;
    if (cfg.param) r["param"] = num(*cfg.param);
  } else {
    const auto s = resolve_spec(cfg);
    spec = catalog_spec(s);
    fit = rq::fit_catalog(spec, d, cfg.seed);
    r["spec"] = spec_json(s);
  }
  const auto quartet = rq::make_catalog_quadrangle(spec);
  r["rows"] = d.rows();
  r["fit"] = fit_json(fit);
  r["zero_in_statistic"] = rq::track_statistic(fit, quartet, cfg.tol);
  if (cfg.equivalence) {
    const auto eq = rq::regression_equivalence_check(quartet, fit, d);
    r["equivalence"] = {{"error_objective", num(eq.error_objective)},
                        {"deviation_objective", num(eq.deviation_objective)},
                        {"gap", num(eq.gap)},
                        {"statistic_contains_zero", eq.statistic_contains_zero}};
  }
  return r;
}

rq::ScenarioSet load_scenarios(const RunConfig& cfg, RunResult& out) {
  if (cfg.input.empty()) throw ValidationError("--input is required");
  IngestInfo info;
  auto s = ingest_scenarios_csv(cfg.input, &info);
  note_ingest(out, cfg.input, info);
  return s;
}

Json cmd_portfolio(const RunConfig& cfg, RunResult& out) {
  const auto sc = load_scenarios(cfg, out);
  const auto s = resolve_spec(cfg);
  rq::PortfolioResult res;
  if (s.family && rq::parse_family(*s.family) == rq::Family::quantile)
    res = rq::portfolio_cvar_lp(catalog_spec(s).alpha, sc, cfg.target);
  else
    res = rq::portfolio_optimize(quartet_of(s).risk, sc, cfg.target);
  Json r = header(cfg, "portfolio");
  r["spec"] = spec_json(s);
  if (cfg.target) r["target_mean"] = num(*cfg.target);
  r["status"] = rq::to_string(res.status);
  r["method"] = res.method;
  r["weights"] = vec(res.weights);
  r["risk"] = num(res.risk);
  return r;
}

Json cmd_dro(const RunConfig& cfg, RunResult& out) {
  const auto sc = load_scenarios(cfg, out);
  const auto s = resolve_spec(cfg);
  rq::DroProblem p{sc, cfg.target, phi_of(s), s.tau.value_or(0.1)};
  const auto res = rq::dro_solve(p);
  Json r = header(cfg, "dro");
  r["spec"] = spec_json(s);
  r["tau"] = num(p.tau);
  if (cfg.target) r["target_mean"] = num(*cfg.target);
  r["status"] = rq::to_string(res.status);
  r["weights"] = vec(res.weights);
  r["value"] = num(res.value);
  r["envelope_value"] = num(res.envelope_value);
  r["gap"] = num(std::abs(res.value - res.envelope_value));
  r["worst_case_density"] = vec(res.worst_case_density);
  r["approximate_density"] = res.approximate_density;
  return r;
}

rq::EpiKernel kernel_of(const RunConfig& cfg) {
  if (cfg.kernel == "quadratic") return rq::quadratic_kernel(cfg.kernel_scale);
  if (cfg.kernel == "l2") return rq::l2_kernel(cfg.kernel_scale);
  if (cfg.kernel == "kl") return rq::kl_kernel();
  throw ValidationError("unknown kernel '" + cfg.kernel + "' (quadratic, l2, kl)");
}

Json cmd_epi(const RunConfig& cfg, RunResult& out) {
  const auto x = load_rv(cfg, out);
  const auto s = resolve_spec(cfg);
  if (!s.family || rq::parse_family(*s.family) != rq::Family::quantile)
    throw ValidationError("epi-regularization takes the CVaR base (family quantile)");
  const double alpha = catalog_spec(s).alpha;
  const auto kernel = kernel_of(cfg);
  std::vector<double> eps = cfg.sweep;
  if (eps.empty()) eps = s.epsilon ? std::vector<double>{*s.epsilon} : kDefaultEpsilons;
  Json r = header(cfg, "epi");
  r["spec"] = spec_json(s);
  r["kernel"] = kernel.name;
  r["mean"] = num(rq::expectation(x));
  r["base_risk"] = num(rq::cvar_direct(x, alpha));
  Json rows = Json::array();
  for (double e : eps) {
    const auto spec = rq::cvar_epi_spec(alpha, kernel, e);
    const double primal = rq::epi_risk_primal(spec, x);
    Json row = {{"epsilon", num(e)}, {"primal", num(primal)}};
    if (x.size() <= 4) {
      const double dual = rq::epi_risk_dual(spec, x);
      row["dual"] = num(dual);
      row["gap"] = num(std::abs(primal - dual));
    } else {
      row["dual"] = nullptr;
      row["gap"] = nullptr;
    }
    rows.push_back(row);
  }
  r["rows"] = rows;
  return r;
}

rq::CatalogSpec default_spec(rq::Family f) {
  rq::CatalogSpec c;
  c.family = f;
  c.alpha = f == rq::Family::qsa ? 0.4 : 0.7;
  c.eps = 0.5;
  c.q = 0.7;
  c.k = 1.0;
  c.x = 0.3;
  return c;
}

Json spec_params(const rq::CatalogSpec& c) {
  switch (c.family) {
    case rq::Family::standard_mean: return {{"lambda", num(c.lambda)}};
    case rq::Family::quantile:
    case rq::Family::cvar2:
    case rq::Family::qsa: return {{"alpha", num(c.alpha)}};
    case rq::Family::qsau: return {{"eps", num(c.eps)}};
    case rq::Family::expectile_mse: return {{"q", num(c.q)}};
    case rq::Family::expectile_pl: return {{"k", num(c.k)}};
    case rq::Family::mean_pl: return Json::object();
    case rq::Family::biased_mean: return {{"x", num(c.x)}};
  }
  return Json::object();
}

// Sampled invariant suite for one catalog entry.
Json check_one(const rq::CatalogSpec& spec, const RunConfig& cfg, bool& all_pass) {
  const auto q = rq::make_catalog_quadrangle(spec);
  std::mt19937_64 rng(cfg.seed);
  rq::SamplerOptions so;
  so.lattice = 0.5;
  double identity = 0.0, stat_gap = 0.0, below_mean = 0.0, env_gap = 0.0;
  bool has_env = true;
  for (int i = 0; i < cfg.max_iter; ++i) {
    const auto x = rq::random_rv(rng, so);
    const double m = rq::expectation(x);
    const double risk = q.risk(x);
    identity = std::max({identity, std::abs(risk - q.deviation(x) - m), std::abs(q.regret(x) - q.error(x) - m)});
    const auto closed = q.statistic(x);
    stat_gap = std::max({stat_gap, closed.distance(rq::project_error(q.error_fn(), x).statistic),
                         closed.distance(rq::regret_to_risk(q.regret_fn(), x).statistic)});
    below_mean = std::max(below_mean, m - risk);
    if (has_env) {
      try {
        const auto env = rq::envelope_extract(spec, rq::FunctionalKind::risk, x.probs());
        env_gap = std::max(env_gap, std::abs(rq::envelope_support(env, x.values()).value - risk));
      } catch (const ValidationError&) {
        has_env = false;
      }
    }
  }
  const bool axioms = rq::check_error_axioms(q.error, cfg.seed).ok;
  const bool pass = identity <= 1e-9 && stat_gap <= cfg.tol && below_mean <= 1e-9 && axioms &&
                    (!has_env || env_gap <= cfg.tol);
  all_pass = all_pass && pass;
  return {{"family", rq::family_name(spec.family)},
          {"params", spec_params(spec)},
          {"identity_gap", num(identity)},
          {"statistic_gap", num(stat_gap)},
          {"risk_minus_mean_min", num(-below_mean)},
          {"error_axioms", axioms},
          {"envelope_gap", has_env ? num(env_gap) : Json(nullptr)},
          {"pass", pass}};
}

Json cmd_check(const RunConfig& cfg, RunResult& out) {
  if (cfg.max_iter <= 0) throw ValidationError("--max-iter must be positive");
  std::vector<rq::CatalogSpec> specs;
  const auto s = resolve_spec(cfg);
  if (s.family) {
    specs.push_back(catalog_spec(s));
  } else {
    if (s.phi) throw ValidationError("check runs on catalog families");
    for (auto f : rq::all_families()) specs.push_back(default_spec(f));
  }
  Json r = header(cfg, "check");
  r["samples"] = cfg.max_iter;
  r["seed"] = cfg.seed;
  bool all_pass = true;
  Json rows = Json::array();
  for (const auto& spec : specs) rows.push_back(check_one(spec, cfg, all_pass));
  r["rows"] = rows;
  r["all_pass"] = all_pass;
  if (!all_pass) out.exit_code = 1;
  return r;
}

}  // namespace

RunResult run_command(const RunConfig& cfg) {
  static const std::map<std::string, std::function<Json(const RunConfig&, RunResult&)>> table = {
      {"eval", cmd_eval},       {"statistic", cmd_statistic}, {"envelope", cmd_envelope},
      {"family", cmd_family},   {"regress", cmd_regress},     {"portfolio", cmd_portfolio},
      {"dro", cmd_dro},         {"epi", cmd_epi},             {"check", cmd_check}};
  RunResult out;
  if (cfg.format != "table" && cfg.format != "json") {
    out.exit_code = 1;
    out.log.push_back("error: --format must be table or json");
    return out;
  }
  const auto it = table.find(cfg.command);
  if (it == table.end()) {
    out.exit_code = 1;
    out.log.push_back("error: unknown command '" + cfg.command + "'");
    return out;
  }
  try {
    out.text = render(it->second(cfg, out), cfg.format);
  } catch (const ValidationError& e) {
    out.exit_code = 1;
    out.log.push_back(std::string("error: ") + e.what());
  } catch (const rq::ConvergenceError& e) {
    Json r = header(cfg, cfg.command.c_str());
    r["status"] = "not_converged";
    r["message"] = e.what();
    out.text = render(r, cfg.format);
    out.exit_code = 2;
    out.log.push_back(std::string("solver did not converge: ") + e.what());
  }
  return out;
}

}  // namespace rqcli
