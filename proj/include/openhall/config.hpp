#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace openhall {

/// Value in a run config: number, bool, string or array.
struct ConfigValue {
  using Array = std::vector<ConfigValue>;
  std::variant<double, bool, std::string, Array> data;
  int line = 0;
  std::string text;  // source spelling, for diagnostics and header echo

  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }
};

/// Flat, ordered key=value document. Supports a subset of TOML:
/// `[table]` headers, dotted keys, numbers, booleans, quoted strings,
/// (possibly nested, multi-line) arrays and `#` comments.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  const ConfigValue& at(const std::string& key) const;
  void set(const std::string& key, ConfigValue value);
  void erase(const std::string& key);

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  int integer(const std::string& key) const;
  int integer_or(const std::string& key, int fallback) const;
  std::string string(const std::string& key) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;

  /// Keys under `prefix.` in document order, with the prefix stripped.
  std::vector<std::string> keys_under(const std::string& prefix) const;
  const std::vector<std::pair<std::string, ConfigValue>>& entries() const { return entries_; }

  /// Canonical `key = value` rendering, one per line.
  std::string render(const std::string& line_prefix = "") const;

 private:
  std::string source_;
  std::vector<std::pair<std::string, ConfigValue>> entries_;
};

ConfigValue number_value(double v);
std::string format_number(double v);

}  // namespace openhall
