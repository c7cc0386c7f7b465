#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "cli.hpp"

namespace rqcli {

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{:.12g}", v);
}

// Stored already rounded, so JSON text and re-parsed values print identically.
Json num(double v) {
  if (!std::isfinite(v)) return fmt_num(v);
  return std::strtod(fmt_num(v).c_str(), nullptr);
}

namespace {

std::string cell(const Json& v) {
  if (v.is_number()) return fmt_num(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "-";
  if (v.is_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + cell(v[i]);
    return s + "]";
  }
  return v.dump();
}

bool is_row_list(const Json& v) { return v.is_array() && !v.empty() && v.front().is_object(); }

void render_rows(const std::string& title, const Json& rows, std::string& out) {
  std::vector<std::string> cols;
  for (const auto& [k, _] : rows.front().items()) cols.push_back(k);
  std::vector<std::size_t> width(cols.size());
  std::vector<std::vector<std::string>> cells;
  for (std::size_t c = 0; c < cols.size(); ++c) width[c] = cols[c].size();
  for (const auto& r : rows) {
    auto& line = cells.emplace_back();
    for (std::size_t c = 0; c < cols.size(); ++c) {
      line.push_back(r.contains(cols[c]) ? cell(r[cols[c]]) : "-");
      width[c] = std::max(width[c], line.back().size());
    }
  }
  out += title + ":\n";
  auto emit = [&](const std::vector<std::string>& line) {
    std::string s = " ";
    for (std::size_t c = 0; c < line.size(); ++c) s += fmt::format(" {:<{}}", line[c], width[c]);
    while (!s.empty() && s.back() == ' ') s.pop_back();
    out += s + "\n";
  };
  emit(cols);
  for (const auto& line : cells) emit(line);
}

// Scalars and plain arrays flatten to dotted keys; row lists become tables.
struct Entry {
  std::string key;
  const Json* value;
};

void flatten(const Json& obj, const std::string& prefix, std::vector<Entry>& out) {
  for (const auto& [k, v] : obj.items()) {
    if (v.is_object())
      flatten(v, prefix + k + ".", out);
    else
      out.push_back({prefix + k, &v});
  }
}

void render_object(const Json& obj, std::string& out) {
  std::vector<Entry> entries;
  flatten(obj, "", entries);
  std::size_t key_width = 0;
  for (const auto& e : entries)
    if (!is_row_list(*e.value)) key_width = std::max(key_width, e.key.size());
  for (const auto& e : entries) {
    if (is_row_list(*e.value))
      render_rows(e.key, *e.value, out);
    else
      out += fmt::format("{:<{}}  {}\n", e.key, key_width, cell(*e.value));
  }
}

}  // namespace

std::string render(const Json& report, const std::string& format) {
  if (format == "json") return report.dump(2) + "\n";
  std::string out;
  render_object(report, out);
  return out;
}

}  // namespace rqcli
