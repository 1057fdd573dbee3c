#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphmcmc {

/// Invalid configuration (parse error, unknown key, bad value, missing
/// file). The command line maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// INI-style config: [section] headers, key = value lines, # or ; comments.
/// Readers mark keys as consumed; finish() rejects anything left over, so
/// misspelled keys fail loudly instead of silently using defaults.
class IniFile {
 public:
  static IniFile load(const std::string& path);
  static IniFile parse(const std::string& text, const std::string& origin);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  std::string require(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section,
                                 const std::string& key) const;

  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  double require_double(const std::string& section, const std::string& key) const;
  long get_long(const std::string& section, const std::string& key,
                long fallback) const;
  long require_long(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<double> require_doubles(const std::string& section,
                                      const std::string& key) const;
  std::optional<std::vector<double>> get_doubles(const std::string& section,
                                                 const std::string& key) const;

  /// Declare a section as recognized even if no key is read from it.
  void touch_section(const std::string& section) const;

  /// Throws ConfigError listing unknown sections and unconsumed keys.
  void finish() const;

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> data_;
  mutable std::set<std::string> touched_sections_;
  mutable std::set<std::pair<std::string, std::string>> consumed_;
};

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what);

}  // namespace graphmcmc
