#pragma once

#include "frob/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace frob {

// Flat key/value text with [section] headers:
//
//   [experiment]
//   kind = ode-check
//   preset = paper-ex1
//   [params]
//   alpha = 0.9
//
// Lists use ';' and matrix columns '|'. Values are kept verbatim so the text
// round-trips.
struct ExperimentConfig {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string serialize() const;

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key, const std::string& fallback = "") const;
  void set(const std::string& section, const std::string& key, const std::string& value);
  // Sets only when absent.
  void set_default(const std::string& section, const std::string& key, const std::string& value);

  std::string kind() const { return get("experiment", "kind"); }
  std::string preset() const { return get("experiment", "preset"); }

  double number(const std::string& key, double fallback) const;  // from [params]
  int integer(const std::string& key, int fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

  bool operator==(const ExperimentConfig&) const = default;
};

// Recognized keys per section; anything else is a parse error.
const std::map<std::string, std::vector<std::string>>& config_schema();

std::vector<std::string> split_list(const std::string& s, char sep = ';');
std::vector<double> parse_numbers(const std::string& s, char sep = ';');
// "a,b,c | d,e,f" → columns (a,b,c) and (d,e,f).
Matrix parse_columns(const std::string& s);
// "lo:hi; lo:hi; ..." per axis.
Box parse_box(const std::string& s);
std::string format_number(double v);

}  // namespace frob
