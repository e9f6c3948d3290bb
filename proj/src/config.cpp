#include "cpt/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace cpt {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// strips a trailing comment, respecting quoted strings
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

ConfigValue parse_value(const std::string& raw, int line_no);

ConfigValue parse_array(const std::string& raw, int line_no) {
  ConfigValue v;
  v.kind = ConfigValue::Kind::array;
  // split at top-level commas
  int depth = 0;
  bool quoted = false;
  std::string current;
  auto flush = [&] {
    const std::string item = trim(current);
    if (!item.empty()) v.arr.push_back(parse_value(item, line_no));
    current.clear();
  };
  for (char c : raw) {
    if (c == '"') quoted = !quoted;
    if (!quoted) {
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == ',' && depth == 0) {
        flush();
        continue;
      }
    }
    current.push_back(c);
  }
  if (depth != 0)
    throw ConfigError("config line " + std::to_string(line_no) +
                      ": unbalanced brackets");
  flush();
  return v;
}

ConfigValue parse_value(const std::string& raw, int line_no) {
  ConfigValue v;
  if (raw.empty())
    throw ConfigError("config line " + std::to_string(line_no) +
                      ": empty value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unterminated string");
    v.kind = ConfigValue::Kind::string;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']')
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unterminated array");
    return parse_array(raw.substr(1, raw.size() - 2), line_no);
  }
  if (raw == "true" || raw == "false") {
    v.kind = ConfigValue::Kind::boolean;
    v.flag = raw == "true";
    return v;
  }
  try {
    size_t used = 0;
    const double num = std::stod(raw, &used);
    if (used == raw.size()) {
      v.kind = ConfigValue::Kind::number;
      v.num = num;
      return v;
    }
  } catch (const std::exception&) {
  }
  v.kind = ConfigValue::Kind::string;  // bare word
  v.str = raw;
  return v;
}

}  // namespace

ConfigTable ConfigTable::parse(const std::string& text) {
  ConfigTable table;
  table.text_ = text;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": empty section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    table.entries_[full] = parse_value(raw, line_no);
  }
  return table;
}

ConfigTable ConfigTable::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool ConfigTable::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

const ConfigValue& ConfigTable::at(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

double ConfigTable::number(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::number)
    throw ConfigError("config key '" + key + "' is not a number");
  return v.num;
}

double ConfigTable::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::string ConfigTable::str(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::string)
    throw ConfigError("config key '" + key + "' is not a string");
  return v.str;
}

std::string ConfigTable::str_or(const std::string& key,
                                const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

bool ConfigTable::flag_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::boolean)
    throw ConfigError("config key '" + key + "' is not a boolean");
  return v.flag;
}

std::vector<double> ConfigTable::number_list(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::array)
    throw ConfigError("config key '" + key + "' is not an array");
  std::vector<double> out;
  for (const auto& item : v.arr) {
    if (item.kind != ConfigValue::Kind::number)
      throw ConfigError("config key '" + key + "' is not a number array");
    out.push_back(item.num);
  }
  return out;
}

std::vector<std::vector<double>> ConfigTable::point_list(
    const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.kind != ConfigValue::Kind::array)
    throw ConfigError("config key '" + key + "' is not an array");
  std::vector<std::vector<double>> out;
  for (const auto& item : v.arr) {
    if (item.kind != ConfigValue::Kind::array)
      throw ConfigError("config key '" + key + "' is not a point array");
    std::vector<double> point;
    for (const auto& coord : item.arr) {
      if (coord.kind != ConfigValue::Kind::number)
        throw ConfigError("config key '" + key + "' has non-numeric point");
      point.push_back(coord.num);
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace cpt
