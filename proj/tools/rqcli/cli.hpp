#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rq/rq.hpp"

namespace rqcli {

using Json = nlohmann::ordered_json;

// Rows read and how far the probability column was from summing to 1.
struct IngestInfo {
  std::size_t rows = 0;
  double normalization_delta = 0.0;
};

// `value,prob` with header, or a single `value` column (equal weights).
// Probabilities are rescaled to sum to 1.
rq::DiscreteRv ingest_rv_csv(const std::string& path, IngestInfo* info = nullptr);

// Header names the columns: `y` is the target, `weight` optional, the rest
// are regressors in file order.
rq::Dataset ingest_dataset_csv(const std::string& path, IngestInfo* info = nullptr);

// Header names the assets; an optional `prob` column weights the scenarios.
rq::ScenarioSet ingest_scenarios_csv(const std::string& path, IngestInfo* info = nullptr);

// Quadrangle selection: a catalog family or a phi divergence with its level.
struct SpecInput {
  std::optional<std::string> family;
  std::optional<std::string> phi;
  std::map<std::string, double> params;
  std::optional<double> tau;
  std::optional<double> epsilon;
};

// Parses `{family|phi, params:{...}, tau?, epsilon?}` from inline JSON or a file.
SpecInput parse_spec(const std::string& text_or_path);
rq::CatalogSpec catalog_spec(const SpecInput& s);

struct RunConfig {
  std::string command;
  std::string input;
  std::string spec;                        // inline JSON or path; may be empty
  std::map<std::string, double> overrides;  // alpha, q, eps, beta, tau, epsilon, ...
  std::optional<std::string> family;
  std::optional<std::string> phi;
  double tol = 1e-7;
  int max_iter = 50;
  std::uint64_t seed = 0;
  std::string format = "table";
  std::string output;

  std::string kind = "risk";          // envelope
  std::string model;                  // regress
  std::optional<double> param;        // regress
  bool equivalence = false;           // regress
  std::optional<double> target;       // portfolio, dro
  std::string kernel = "quadratic";   // epi
  double kernel_scale = 1.0;          // epi
  std::vector<double> sweep;          // family (tau) and epi (epsilon)
};

struct RunResult {
  int exit_code = 0;
  std::string text;              // the report
  std::vector<std::string> log;  // diagnostics for stderr
};

RunResult run_command(const RunConfig& cfg);

// 12 significant digits; infinities become the strings "inf" / "-inf".
Json num(double v);
std::string fmt_num(double v);
std::string render(const Json& report, const std::string& format);

}  // namespace rqcli
