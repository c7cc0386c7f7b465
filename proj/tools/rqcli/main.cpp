#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"

namespace {

struct Flags {
  rqcli::RunConfig cfg;
  std::map<std::string, double> scalars;
  std::vector<double> taus;
  std::vector<double> epsilons;
  double param = 0.0;
  double target = 0.0;
};

void add_common(CLI::App* sub, Flags& f) {
  auto& c = f.cfg;
  sub->add_option("--input,-i", c.input, "CSV input");
  sub->add_option("--spec,-s", c.spec, "JSON spec, inline or a file path");
  sub->add_option("--family", c.family, "catalog family");
  sub->add_option("--phi", c.phi, "phi divergence: kl, tv, pearson, extended_pearson, gen_extended_pearson");
  for (const char* name : {"alpha", "q", "eps", "beta", "lambda", "k", "x"})
    sub->add_option(std::string("--") + name, f.scalars[name], std::string("parameter ") + name);
  sub->add_option("--tau", f.taus, "divergence level; a list sweeps the family command");
  sub->add_option("--epsilon", f.epsilons, "epi-regularization scale; a list sweeps the epi command");
  sub->add_option("--tol", c.tol, "tolerance for reported agreement tests")->capture_default_str();
  sub->add_option("--max-iter", c.max_iter, "sampled instances per invariant check")->capture_default_str();
  sub->add_option("--seed", c.seed, "seed for sampling and multi-start")->capture_default_str();
  sub->add_option("--format,-f", c.format, "table or json")->capture_default_str();
  sub->add_option("--output,-o", c.output, "write the report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk quadrangle calculus on finite discrete random variables"};
  app.require_subcommand(1);
  Flags f;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"eval", "risk, deviation, regret, error and statistic of a quadrangle"},
      {"statistic", "statistic by closed form, error projection and regret formula"},
      {"envelope", "dual envelope support and axiom checks"},
      {"family", "tau sweep of a divergence family"},
      {"regress", "generalized linear regression"},
      {"portfolio", "risk-minimizing portfolio over the simplex"},
      {"dro", "portfolio under a divergence-ball ambiguity set"},
      {"epi", "epsilon sweep of the epi-regularized CVaR, primal and dual"},
      {"check", "sampled invariant suite on catalog families"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, f);
    const std::string cmd = name;
    if (cmd == "envelope") sub->add_option("--kind", f.cfg.kind, "risk, deviation, regret or error")->capture_default_str();
    if (cmd == "regress") {
      sub->add_option("--model", f.cfg.model, "quantile, expectile_pl, expectile_mse, svr, mean_pl, biased_mean");
      sub->add_option("--param", f.param, "model parameter (alpha, K, q, eps or x)");
      sub->add_flag("--equivalence", f.cfg.equivalence, "also solve the constrained deviation form");
    }
    if (cmd == "portfolio" || cmd == "dro") sub->add_option("--target", f.target, "required mean return");
    if (cmd == "epi") {
      sub->add_option("--kernel", f.cfg.kernel, "quadratic, l2 or kl")->capture_default_str();
      sub->add_option("--scale", f.cfg.kernel_scale, "kernel coefficient c")->capture_default_str();
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto& cfg = f.cfg;
  auto* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  auto given = [sub](const std::string& flag) {
    const auto* opt = sub->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  for (const auto& [name, value] : f.scalars)
    if (given("--" + name)) cfg.overrides[name] = value;
  if (given("--param")) cfg.param = f.param;
  if (given("--target")) cfg.target = f.target;
  auto scalar_or_sweep = [&](const char* name, const std::vector<double>& values, const char* sweeping) {
    if (values.empty()) return true;
    if (cfg.command == sweeping) {
      cfg.sweep = values;
    } else if (values.size() == 1) {
      cfg.overrides[name] = values.front();
    } else {
      std::cerr << "error: --" << name << " takes one value here\n";
      return false;
    }
    return true;
  };
  if (!scalar_or_sweep("tau", f.taus, "family") || !scalar_or_sweep("epsilon", f.epsilons, "epi")) return 1;

  const auto res = rqcli::run_command(cfg);
  for (const auto& line : res.log) std::cerr << line << "\n";
  if (!res.text.empty()) {
    if (cfg.output.empty()) {
      std::cout << res.text;
    } else {
      std::ofstream out(cfg.output);
      if (!out) {
        std::cerr << "error: cannot write '" << cfg.output << "'\n";
        return 1;
      }
      out << res.text;
    }
  }
  return res.exit_code;
}
