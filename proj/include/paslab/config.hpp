#ifndef PASLAB_CONFIG_HPP
#define PASLAB_CONFIG_HPP

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "paslab/common.hpp"
#include "paslab/rng.hpp"

namespace paslab {

// Flat `section.key = value` text format. `#` starts a comment, keys form a tree
// through dots, list values are comma separated, units live in the key names
// (e.g. link.span_km). Later assignments override earlier ones.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(t.substr(0, eq));
      const std::string val = trim(t.substr(eq + 1));
      if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      c.values_[key] = val;
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing key: " + key);
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& dflt) const {
    const auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
  double get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
  }
  long long get_int(const std::string& key) const { return to_int(key, get_string(key)); }
  long long get_int(const std::string& key, long long dflt) const {
    return has(key) ? get_int(key) : dflt;
  }
  bool get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key " + key + ": not a boolean: " + v);
  }
  bool get_bool(const std::string& key, bool dflt) const {
    return has(key) ? get_bool(key) : dflt;
  }

  std::vector<std::string> get_string_list(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream in(get_string(key));
    std::string item;
    while (std::getline(in, item, ',')) {
      const std::string t = trim(item);
      if (!t.empty()) out.push_back(t);
    }
    if (out.empty()) throw ConfigError("key " + key + ": empty list");
    return out;
  }
  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : get_string_list(key)) out.push_back(to_double(key, s));
    return out;
  }
  std::vector<long long> get_int_list(const std::string& key) const {
    std::vector<long long> out;
    for (const auto& s : get_string_list(key)) out.push_back(to_int(key, s));
    return out;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  // Merge: entries of `over` override entries of *this.
  void apply_overrides(const Config& over) {
    for (const auto& [k, v] : over.values_) values_[k] = v;
  }

  // Canonical text: sorted keys, single spacing. Used for hashing and manifests.
  std::string canonical_text() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    return out.str();
  }

  std::uint64_t hash() const { return stream_key(0, canonical_text()); }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
  static double to_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("key " + key + ": not a number: " + v);
    }
  }
  static long long to_int(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const long long i = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return i;
    } catch (const std::exception&) {
      throw ConfigError("key " + key + ": not an integer: " + v);
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace paslab

#endif
