#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mvet/runconfig.hpp"

namespace mvet {

namespace {

std::string trim(std::string_view s) {
  const auto from = s.find_first_not_of(" \t\r");
  if (from == std::string_view::npos) return {};
  const auto to = s.find_last_not_of(" \t\r");
  return std::string(s.substr(from, to - from + 1));
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path.string());
  return from_stream(in);
}

RunConfig RunConfig::from_stream(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key=value");
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) throw ParseError(lineno, "empty key");
    if (cfg.values_.count(key)) throw ParseError(lineno, "duplicate key '" + key + "'");
    cfg.values_.emplace(key, trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::set(std::string key, std::string value) {
  values_[std::move(key)] = std::move(value);
}

void RunConfig::set_kv(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigInvalid("expected key=value, got '" + kv + "'");
  }
  set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigInvalid("key '" + key + "' expects an unsigned integer, got '" + s + "'");
  }
  return value;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigInvalid("key '" + key + "' expects a number, got '" + s + "'");
  }
  return value;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string s = it->second;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigInvalid("key '" + key + "' expects a boolean, got '" + it->second + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  const auto it = values_.find(key);
  if (it == values_.end()) return out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

void RunConfig::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigInvalid("unknown config key '" + key + "'");
    }
  }
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << '=' << value << '\n';
  return out.str();
}

}  // namespace mvet
