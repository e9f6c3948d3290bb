#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpt {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// One parsed value: number, string, boolean, or (possibly nested) array.
struct ConfigValue {
  enum class Kind { number, string, boolean, array };
  Kind kind = Kind::number;
  double num = 0.0;
  std::string str;
  bool flag = false;
  std::vector<ConfigValue> arr;
};

/// Structured key-value configuration text with [section] tables:
///   mode = "minimax"
///   [pair]
///   kind = "saddle"
///   R = 2.0
///   path_b = [1.0, 0.0]
/// Keys are addressed as "section.key". Values: decimal/scientific reals,
/// quoted or bare strings, true/false, and single-line (nested) arrays.
class ConfigTable {
 public:
  static ConfigTable parse(const std::string& text);
  static ConfigTable parse_file(const std::string& path);

  bool has(const std::string& key) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  std::vector<double> number_list(const std::string& key) const;
  std::vector<std::vector<double>> point_list(const std::string& key) const;

  const std::string& text() const { return text_; }

 private:
  const ConfigValue& at(const std::string& key) const;

  std::map<std::string, ConfigValue> entries_;
  std::string text_;
};

}  // namespace cpt
