#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace rqcli {

using rq::ValidationError;

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;  // file line of each row, 1-based
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

std::string where(const std::string& path, std::size_t line) { return path + ":" + std::to_string(line) + ": "; }

// A header row is present iff the first cell of the first row is not a number.
Table read_table(const std::string& path, bool header_required) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    double probe = 0.0;
    if (first) {
      first = false;
      if (!parse_double(cells.front(), probe)) {
        t.header = cells;
        continue;
      }
      if (header_required) throw ValidationError(where(path, lineno) + "a header row naming the columns is required");
    }
    const std::size_t width = t.header.empty() ? (t.rows.empty() ? cells.size() : t.rows.front().size())
                                               : t.header.size();
    if (cells.size() != width)
      throw ValidationError(where(path, lineno) + "expected " + std::to_string(width) + " cells, found " +
                            std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j)
      if (!parse_double(cells[j], row[j]))
        throw ValidationError(where(path, lineno) + "cell " + std::to_string(j + 1) + " is not a number: '" +
                              cells[j] + "'");
    t.rows.push_back(std::move(row));
    t.lines.push_back(lineno);
  }
  if (t.rows.empty()) throw ValidationError("'" + path + "' holds no data rows");
  return t;
}

std::ptrdiff_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  return it == t.header.end() ? -1 : it - t.header.begin();
}

// Checks a weight column and rescales it to sum to 1.
std::vector<double> normalized_weights(const std::string& path, const Table& t, std::size_t col, IngestInfo* info) {
  std::vector<double> w(t.rows.size());
  double total = 0.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    w[i] = t.rows[i][col];
    if (w[i] < 0.0) throw ValidationError(where(path, t.lines[i]) + "negative probability");
    total += w[i];
  }
  if (!(total > 0.0)) throw ValidationError("'" + path + "': probabilities sum to zero");
  for (double& v : w) v /= total;
  if (info) info->normalization_delta = total - 1.0;
  return w;
}

}  // namespace

rq::DiscreteRv ingest_rv_csv(const std::string& path, IngestInfo* info) {
  const Table t = read_table(path, false);
  const std::size_t width = t.rows.front().size();
  if (width != 1 && width != 2) throw ValidationError("'" + path + "': expected columns value or value,prob");
  if (info) *info = {t.rows.size(), 0.0};
  std::vector<double> values(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) values[i] = t.rows[i][0];
  if (width == 1) return rq::DiscreteRv::uniform(values);
  return rq::DiscreteRv(values, normalized_weights(path, t, 1, info));
}

rq::Dataset ingest_dataset_csv(const std::string& path, IngestInfo* info) {
  const Table t = read_table(path, true);
  const auto y = column(t, "y");
  if (y < 0) throw ValidationError("'" + path + "': no target column named y");
  const auto w = column(t, "weight");
  if (info) *info = {t.rows.size(), 0.0};
  rq::Dataset d;
  if (w >= 0) d.weights = normalized_weights(path, t, static_cast<std::size_t>(w), info);
  for (const auto& row : t.rows) {
    std::vector<double> x;
    for (std::size_t j = 0; j < row.size(); ++j)
      if (static_cast<std::ptrdiff_t>(j) != y && static_cast<std::ptrdiff_t>(j) != w) x.push_back(row[j]);
    d.features.push_back(std::move(x));
    d.target.push_back(row[static_cast<std::size_t>(y)]);
  }
  d.validate();
  return d;
}

rq::ScenarioSet ingest_scenarios_csv(const std::string& path, IngestInfo* info) {
  const Table t = read_table(path, true);
  const auto p = column(t, "prob");
  if (info) *info = {t.rows.size(), 0.0};
  rq::ScenarioSet s;
  if (p >= 0) s.probs = normalized_weights(path, t, static_cast<std::size_t>(p), info);
  for (const auto& row : t.rows) {
    std::vector<double> r;
    for (std::size_t j = 0; j < row.size(); ++j)
      if (static_cast<std::ptrdiff_t>(j) != p) r.push_back(row[j]);
    s.returns.push_back(std::move(r));
  }
  s.validate();
  return s;
}

SpecInput parse_spec(const std::string& text_or_path) {
  std::string text = text_or_path;
  if (trim(text).rfind('{', 0) != 0) {
    std::ifstream in(text_or_path);
    if (!in) throw ValidationError("cannot open spec '" + text_or_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  const auto j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("spec is not a JSON object");
  SpecInput s;
  for (const auto& [key, val] : j.items()) {
    if (key == "family" || key == "phi") {
      if (!val.is_string()) throw ValidationError("spec field '" + key + "' must be a string");
      (key == "family" ? s.family : s.phi) = val.get<std::string>();
    } else if (key == "tau" || key == "epsilon") {
      if (!val.is_number()) throw ValidationError("spec field '" + key + "' must be a number");
      (key == "tau" ? s.tau : s.epsilon) = val.get<double>();
    } else if (key == "params") {
      if (!val.is_object()) throw ValidationError("spec params must be an object");
      for (const auto& [pk, pv] : val.items()) {
        if (!pv.is_number()) throw ValidationError("spec param '" + pk + "' must be a number");
        s.params[pk] = pv.get<double>();
      }
    } else {
      throw ValidationError("unknown spec field '" + key + "'");
    }
  }
  if (s.family && s.phi) throw ValidationError("spec names both a family and a phi");
  return s;
}

rq::CatalogSpec catalog_spec(const SpecInput& s) {
  if (!s.family) throw ValidationError("spec names no catalog family");
  rq::CatalogSpec c;
  c.family = rq::parse_family(*s.family);
  for (const auto& [k, v] : s.params) {
    if (k == "lambda") c.lambda = v;
    else if (k == "alpha") c.alpha = v;
    else if (k == "eps") c.eps = v;
    else if (k == "q") c.q = v;
    else if (k == "k") c.k = v;
    else if (k == "x") c.x = v;
    else throw ValidationError("unknown catalog parameter '" + k + "'");
  }
  return c;
}

}  // namespace rqcli
