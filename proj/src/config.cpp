#include "openhall/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "openhall/errors.hpp"

namespace openhall {

namespace {

class Parser {
 public:
  Parser(const std::string& text, std::string source) : s_(text), source_(std::move(source)) {}

  std::vector<std::pair<std::string, ConfigValue>> run() {
    std::vector<std::pair<std::string, ConfigValue>> out;
    std::string table;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        skip_inline_ws();
        table = parse_key();
        skip_inline_ws();
        expect(']');
        end_of_line();
        continue;
      }
      const int line = line_;
      std::string key = parse_key();
      if (!table.empty()) key = table + "." + key;
      skip_inline_ws();
      expect('=');
      skip_inline_ws();
      const std::size_t start = pos_;
      ConfigValue v = parse_value();
      v.line = line;
      v.text = trim(s_.substr(start, pos_ - start));
      end_of_line();
      for (const auto& [k, _] : out)
        if (k == key) fail(line, "duplicate key '" + key + "'");
      out.emplace_back(std::move(key), std::move(v));
    }
    return out;
  }

 private:
  const std::string& s_;
  std::string source_;
  std::size_t pos_ = 0;
  int line_ = 1;

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    std::ostringstream os;
    os << source_ << ":" << line << ": " << msg;
    throw ConfigError(os.str());
  }

  static std::string trim(const std::string& t) {
    const auto b = t.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = t.find_last_not_of(" \t\r\n");
    return t.substr(b, e - b + 1);
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_inline_ws();
      skip_comment();
      if (peek() == '\n') {
        ++pos_;
        ++line_;
      } else {
        break;
      }
    }
  }

  // whitespace, comments and newlines inside arrays
  void skip_any_ws() {
    while (!eof()) {
      skip_inline_ws();
      skip_comment();
      if (peek() == '\n') {
        ++pos_;
        ++line_;
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    if (peek() != c) fail(line_, std::string("expected '") + c + "'");
    ++pos_;
  }

  void end_of_line() {
    skip_inline_ws();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail(line_, "unexpected trailing characters");
    ++pos_;
    ++line_;
  }

  std::string parse_key() {
    std::string key;
    while (true) {
      skip_inline_ws();
      std::string part;
      if (peek() == '"') {
        part = parse_string();
      } else {
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
          part += s_[pos_++];
      }
      if (part.empty()) fail(line_, "expected a key");
      key += part;
      skip_inline_ws();
      if (peek() == '.') {
        ++pos_;
        key += '.';
        continue;
      }
      return key;
    }
  }

  std::string parse_string() {
    const char q = peek();
    ++pos_;
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail(line_, "unterminated string");
      char c = s_[pos_++];
      if (c == q) break;
      if (c == '\\' && q == '"') {
        if (eof()) fail(line_, "unterminated string");
        const char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '\\': out += '\\'; break;
          case '"': out += '"'; break;
          default: fail(line_, std::string("unknown escape \\") + e);
        }
        continue;
      }
      out += c;
    }
    return out;
  }

  ConfigValue parse_value() {
    ConfigValue v;
    const char c = peek();
    if (c == '"' || c == '\'') {
      v.data = parse_string();
      return v;
    }
    if (c == '[') {
      ++pos_;
      ConfigValue::Array arr;
      skip_any_ws();
      while (peek() != ']') {
        const std::size_t start = pos_;
        ConfigValue item = parse_value();
        item.line = line_;
        item.text = trim(s_.substr(start, pos_ - start));
        arr.push_back(std::move(item));
        skip_any_ws();
        if (peek() == ',') {
          ++pos_;
          skip_any_ws();
        } else if (peek() != ']') {
          fail(line_, "expected ',' or ']' in array");
        }
      }
      ++pos_;
      v.data = std::move(arr);
      return v;
    }
    std::string word;
    while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
           peek() != '#')
      word += s_[pos_++];
    if (word == "true" || word == "false") {
      v.data = word == "true";
      return v;
    }
    std::string digits;
    for (char ch : word)
      if (ch != '_') digits += ch;
    if (digits == "inf" || digits == "+inf" || digits == "-inf" || digits == "nan")
      fail(line_, "non-finite number '" + word + "'");
    double x = 0.0;
    const char* b = digits.data();
    const char* e = b + digits.size();
    if (!digits.empty() && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, x);
    if (digits.empty() || ec != std::errc() || ptr != e)
      fail(line_, word.empty() ? "missing value" : "malformed value '" + word + "'");
    v.data = x;
    return v;
  }
};

std::string render_value(const ConfigValue& v) {
  if (const auto* d = std::get_if<double>(&v.data)) return format_number(*d);
  if (const auto* b = std::get_if<bool>(&v.data)) return *b ? "true" : "false";
  if (const auto* s = std::get_if<std::string>(&v.data)) return "\"" + *s + "\"";
  const auto& arr = std::get<ConfigValue::Array>(v.data);
  std::string out = "[";
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (i) out += ", ";
    out += render_value(arr[i]);
  }
  return out + "]";
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

ConfigValue number_value(double v) {
  ConfigValue c;
  c.data = v;
  c.text = format_number(v);
  return c;
}

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  c.source_ = source;
  c.entries_ = Parser(text, source).run();
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

bool Config::has(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const ConfigValue& Config::at(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw ConfigError(source_ + ": missing key '" + key + "'");
}

void Config::set(const std::string& key, ConfigValue value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      value.line = v.line;
      v = std::move(value);
      return;
    }
  entries_.emplace_back(key, std::move(value));
}

void Config::erase(const std::string& key) {
  std::erase_if(entries_, [&](const auto& e) { return e.first == key; });
}

namespace {

[[noreturn]] void type_error(const std::string& source, const std::string& key, const ConfigValue& v,
                             const char* expected) {
  std::ostringstream os;
  os << source << ":" << v.line << ": key '" << key << "': expected " << expected << ", got '" << v.text
     << "'";
  throw ConfigError(os.str());
}

}  // namespace

double Config::number(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_number()) type_error(source_, key, v, "a number");
  return std::get<double>(v.data);
}

double Config::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

int Config::integer(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_number()) type_error(source_, key, v, "an integer");
  const double d = std::get<double>(v.data);
  if (d != std::floor(d) || std::abs(d) > 1e9) type_error(source_, key, v, "an integer");
  return static_cast<int>(d);
}

int Config::integer_or(const std::string& key, int fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::string Config::string(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_string()) type_error(source_, key, v, "a string");
  return std::get<std::string>(v.data);
}

std::string Config::string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

bool Config::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (!v.is_bool()) type_error(source_, key, v, "true or false");
  return std::get<bool>(v.data);
}

std::vector<double> Config::numbers(const std::string& key) const {
  const auto& v = at(key);
  if (v.is_number()) return {std::get<double>(v.data)};
  if (!v.is_array()) type_error(source_, key, v, "a number list");
  std::vector<double> out;
  for (const auto& item : std::get<ConfigValue::Array>(v.data)) {
    if (!item.is_number()) type_error(source_, key, item, "a number");
    out.push_back(std::get<double>(item.data));
  }
  return out;
}

std::vector<std::string> Config::keys_under(const std::string& prefix) const {
  std::vector<std::string> out;
  const std::string p = prefix + ".";
  for (const auto& [k, _] : entries_)
    if (k.rfind(p, 0) == 0) out.push_back(k.substr(p.size()));
  return out;
}

std::string Config::render(const std::string& line_prefix) const {
  std::string out;
  for (const auto& [k, v] : entries_) out += line_prefix + k + " = " + render_value(v) + "\n";
  return out;
}

}  // namespace openhall
