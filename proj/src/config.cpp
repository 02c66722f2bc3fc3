#include "frob/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace frob {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_ident(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
}

double to_double(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw DomainError("config: '" + what + "' is not a number: '" + s + "'");
  return v;
}

}  // namespace

const std::map<std::string, std::vector<std::string>>& config_schema() {
  static const std::map<std::string, std::vector<std::string>> schema{
      {"experiment", {"kind", "preset", "expect", "seed"}},
      {"field",
       {"names", "components", "domain", "m", "form", "modulus", "modulus2", "function", "map", "inverse", "torus",
        "e0", "f", "g", "h", "x_names", "y_names", "point", "x0", "y0", "targets", "index", "y_axes"}},
      {"params",
       {"alpha", "beta", "gamma", "delta", "a11", "a12", "a21", "a22", "b1", "b2", "eps", "eps_list", "eps1", "grid",
        "res", "step", "depth", "k", "k_max", "T", "deltas", "ensemble", "lattice", "initial_probe", "field_probe",
        "amp", "cells", "limit_extra"}},
      {"output", {"dir", "file"}},
  };
  return schema;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  const auto& schema = config_schema();
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#') continue;
    const int col = static_cast<int>(first) + 1;
    if (raw[first] == '[') {
      const auto close = raw.find(']', first);
      if (close == std::string::npos) throw ParseError("config: unterminated section header", line_no, col);
      section = trim(raw.substr(first + 1, close - first - 1));
      if (!schema.count(section)) throw ParseError("config: unknown section '" + section + "'", line_no, col + 1);
      if (!trim(raw.substr(close + 1)).empty())
        throw ParseError("config: trailing text after section header", line_no, static_cast<int>(close) + 2);
      c.sections[section];
      continue;
    }
    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected 'key = value'", line_no, col);
    const std::string key = trim(raw.substr(0, eq));
    if (!is_ident(key)) throw ParseError("config: malformed key '" + key + "'", line_no, col);
    if (section.empty()) throw ParseError("config: key outside any section", line_no, col);
    const auto& allowed = schema.at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ParseError("config: unknown key '" + key + "' in [" + section + "]", line_no, col);
    if (c.sections[section].count(key)) throw ParseError("config: duplicate key '" + key + "'", line_no, col);
    c.sections[section][key] = trim(raw.substr(eq + 1));
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: file-not-found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, kv] : sections) {
    if (!first) os << "\n";
    first = false;
    os << "[" << name << "]\n";
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
  }
  return os.str();
}

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
  const auto it = sections.find(section);
  return it != sections.end() && it->second.count(key);
}

std::string ExperimentConfig::get(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  return has(section, key) ? sections.at(section).at(key) : fallback;
}

void ExperimentConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  const auto& schema = config_schema();
  const auto it = schema.find(section);
  if (it == schema.end() || std::find(it->second.begin(), it->second.end(), key) == it->second.end())
    throw DomainError("config: unknown key '" + key + "' in [" + section + "]");
  if (value.find('\n') != std::string::npos) throw DomainError("config: value for '" + key + "' spans lines");
  sections[section][key] = trim(value);
}

void ExperimentConfig::set_default(const std::string& section, const std::string& key, const std::string& value) {
  if (!has(section, key)) set(section, key, value);
}

double ExperimentConfig::number(const std::string& key, double fallback) const {
  return has("params", key) ? to_double(get("params", key), key) : fallback;
}

int ExperimentConfig::integer(const std::string& key, int fallback) const {
  if (!has("params", key)) return fallback;
  const double v = number(key, 0.0);
  if (v != static_cast<int>(v)) throw DomainError("config: '" + key + "' must be an integer");
  return static_cast<int>(v);
}

bool ExperimentConfig::flag(const std::string& key, bool fallback) const {
  if (!has("params", key)) return fallback;
  const std::string v = get("params", key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw DomainError("config: '" + key + "' must be true or false");
}

std::vector<double> ExperimentConfig::numbers(const std::string& key, const std::vector<double>& fallback) const {
  return has("params", key) ? parse_numbers(get("params", key)) : fallback;
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

std::vector<double> parse_numbers(const std::string& s, char sep) {
  std::vector<double> v;
  for (const auto& t : split_list(s, sep)) v.push_back(to_double(t, s));
  return v;
}

Matrix parse_columns(const std::string& s) {
  const auto cols = split_list(s, '|');
  if (cols.empty()) throw DomainError("config: empty matrix");
  std::vector<std::vector<double>> c;
  for (const auto& col : cols) c.push_back(parse_numbers(col, ','));
  Matrix m(c.front().size(), c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j].size() != c.front().size()) throw DomainError("config: ragged matrix '" + s + "'");
    for (std::size_t i = 0; i < c[j].size(); ++i) m(i, j) = c[j][i];
  }
  return m;
}

Box parse_box(const std::string& s) {
  const auto axes = split_list(s);
  Vector lo(axes.size()), hi(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto parts = split_list(axes[i], ':');
    if (parts.size() != 2) throw DomainError("config: domain axis must read lo:hi, got '" + axes[i] + "'");
    lo[i] = to_double(parts[0], "domain");
    hi[i] = to_double(parts[1], "domain");
  }
  return Box(lo, hi);
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  // Prefer the shortest representation that reads back exactly.
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream t;
    t.precision(p);
    t << v;
    if (std::stod(t.str()) == v) return t.str();
  }
  return os.str();
}

}  // namespace frob
