#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key = value experiment configuration. '#' starts a comment, keys are
// unique, every diagnostic carries file and line.
class Config {
 public:
  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path);
  }

  static Config from_string(const std::string& text, const std::string& name) {
    Config cfg;
    cfg.name_ = name;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError(cfg.at_line(lineno) + "expected 'key = value', got '" + trimmed + "'");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) throw ConfigError(cfg.at_line(lineno) + "empty key");
      if (cfg.entries_.count(key))
        throw ConfigError(cfg.at_line(lineno) + "duplicate key '" + key + "'");
      cfg.entries_[key] = Entry{value, lineno};
    }
    return cfg;
  }

  const std::string& source_name() const { return name_; }
  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::vector<std::string> keys() const {
    std::vector<std::string> ks;
    for (const auto& [k, v] : entries_) ks.push_back(k);
    return ks;
  }

  int line_of(const std::string& key) const { return entries_.at(key).line; }

  std::string get_string(const std::string& key) const {
    const Entry& e = require(key);
    return e.value;
  }

  uint64_t get_u64(const std::string& key) const {
    return parse_with<uint64_t>(key, "unsigned integer", [](const std::string& s, size_t* pos) {
      if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
      return std::stoull(s, pos);
    });
  }

  long get_long(const std::string& key) const {
    return parse_with<long>(key, "integer",
                            [](const std::string& s, size_t* pos) { return std::stol(s, pos); });
  }

  int get_int(const std::string& key) const {
    const long v = get_long(key);
    return static_cast<int>(v);
  }

  double get_double(const std::string& key) const {
    return parse_with<double>(key, "number",
                              [](const std::string& s, size_t* pos) { return std::stod(s, pos); });
  }

  bool get_bool(const std::string& key) const {
    const Entry& e = require(key);
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw ConfigError(at_line(e.line) + "expected boolean for '" + key + "', got '" + e.value + "'");
  }

  std::vector<long> get_long_list(const std::string& key) const {
    std::vector<long> out;
    for (const std::string& item : split_list(key))
      out.push_back(parse_item<long>(key, item, "integer", [](const std::string& s, size_t* pos) {
        return std::stol(s, pos);
      }));
    return out;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& item : split_list(key))
      out.push_back(parse_item<double>(key, item, "number", [](const std::string& s, size_t* pos) {
        return std::stod(s, pos);
      }));
    return out;
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    if constexpr (std::is_same_v<T, double>) return get_double(key);
    else if constexpr (std::is_same_v<T, bool>) return get_bool(key);
    else if constexpr (std::is_same_v<T, uint64_t>) return get_u64(key);
    else if constexpr (std::is_same_v<T, int>) return get_int(key);
    else return static_cast<T>(get_long(key));
  }

  std::string get_string_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  // Sorted key=value lines; the identity hashed into the run fingerprint.
  // Output location and worker count never change results, so they are left
  // out of the canonical form.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, e] : entries_) {
      if (k == "workers" || k == "out") continue;
      out += k + "=" + e.value + "\n";
    }
    return out;
  }

  std::string missing_message(const std::string& key) const {
    return name_ + ": missing required field '" + key + "'";
  }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  std::string at_line(int line) const {
    return name_ + ":" + std::to_string(line) + ": ";
  }

  const Entry& require(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(missing_message(key));
    return it->second;
  }

  template <typename T, typename Fn>
  T parse_with(const std::string& key, const char* what, Fn fn) const {
    const Entry& e = require(key);
    return parse_item<T>(key, e.value, what, fn, e.line);
  }

  template <typename T, typename Fn>
  T parse_item(const std::string& key, const std::string& text, const char* what, Fn fn,
               int line = -1) const {
    const int at = line >= 0 ? line : entries_.at(key).line;
    try {
      size_t pos = 0;
      const T v = fn(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError(at_line(at) + "expected " + what + " for '" + key + "', got '" +
                        text + "'");
    }
  }

  std::vector<std::string> split_list(const std::string& key) const {
    const Entry& e = require(key);
    std::vector<std::string> items;
    std::string cur;
    std::istringstream in(e.value);
    while (std::getline(in, cur, ',')) {
      const std::string t = trim(cur);
      if (t.empty())
        throw ConfigError(at_line(e.line) + "empty element in list '" + key + "'");
      items.push_back(t);
    }
    if (items.empty())
      throw ConfigError(at_line(e.line) + "list '" + key + "' is empty");
    return items;
  }

  std::string name_;
  std::map<std::string, Entry> entries_;
};

}  // namespace ftlab
