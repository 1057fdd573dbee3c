#include "graphmcmc/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace graphmcmc {

namespace {
std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& s, const std::string& what) {
  const char* c = s.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(c, &end);
  if (end == c || *end != '\0' || errno != 0)
    throw ConfigError("expected a number for " + what + ", got '" + s + "'");
  return v;
}

long to_long(const std::string& s, const std::string& what) {
  const char* c = s.c_str();
  char* end = nullptr;
  errno = 0;
  long v = std::strtol(c, &end, 10);
  if (end == c || *end != '\0' || errno != 0)
    throw ConfigError("expected an integer for " + what + ", got '" + s + "'");
  return v;
}
}  // namespace

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (ss >> tok) out.push_back(to_double(tok, what));
  if (out.empty()) throw ConfigError("expected numbers for " + what);
  return out;
}

IniFile IniFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

IniFile IniFile::parse(const std::string& text, const std::string& origin) {
  IniFile f;
  f.origin_ = origin;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": empty section name");
      f.data_[section];  // record even if empty
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key = value");
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": key outside any [section]");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (f.data_[section].count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "' in [" + section + "]");
    f.data_[section][key] = value;
  }
  return f;
}

bool IniFile::has_section(const std::string& section) const {
  return data_.count(section) > 0;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  return s != data_.end() && s->second.count(key) > 0;
}

std::optional<std::string> IniFile::get(const std::string& section,
                                        const std::string& key) const {
  auto s = data_.find(section);
  if (s == data_.end()) return std::nullopt;
  touched_sections_.insert(section);
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  consumed_.insert({section, key});
  return k->second;
}

std::string IniFile::require(const std::string& section,
                             const std::string& key) const {
  auto v = get(section, key);
  if (!v)
    throw ConfigError(origin_ + ": missing required key '" + key + "' in [" +
                      section + "]");
  return *v;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
  auto v = get(section, key);
  return v ? to_double(*v, "[" + section + "] " + key) : fallback;
}

double IniFile::require_double(const std::string& section,
                               const std::string& key) const {
  return to_double(require(section, key), "[" + section + "] " + key);
}

long IniFile::get_long(const std::string& section, const std::string& key,
                       long fallback) const {
  auto v = get(section, key);
  return v ? to_long(*v, "[" + section + "] " + key) : fallback;
}

long IniFile::require_long(const std::string& section,
                           const std::string& key) const {
  return to_long(require(section, key), "[" + section + "] " + key);
}

bool IniFile::get_bool(const std::string& section, const std::string& key,
                       bool fallback) const {
  auto v = get(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("expected a boolean for [" + section + "] " + key +
                    ", got '" + *v + "'");
}

std::vector<double> IniFile::require_doubles(const std::string& section,
                                             const std::string& key) const {
  return parse_double_list(require(section, key), "[" + section + "] " + key);
}

std::optional<std::vector<double>> IniFile::get_doubles(
    const std::string& section, const std::string& key) const {
  auto v = get(section, key);
  if (!v) return std::nullopt;
  return parse_double_list(*v, "[" + section + "] " + key);
}

void IniFile::touch_section(const std::string& section) const {
  touched_sections_.insert(section);
}

void IniFile::finish() const {
  std::string complaints;
  for (const auto& [section, kv] : data_) {
    if (!touched_sections_.count(section)) {
      complaints += " unknown section [" + section + "];";
      continue;
    }
    for (const auto& [key, value] : kv)
      if (!consumed_.count({section, key}))
        complaints += " unknown key '" + key + "' in [" + section + "];";
  }
  if (!complaints.empty())
    throw ConfigError(origin_ + ":" + complaints);
}

}  // namespace graphmcmc
