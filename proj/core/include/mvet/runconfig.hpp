#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mvet/error.hpp"

namespace mvet {

// Flat key=value run configuration. Files hold one pair per line with `#`
// comments; later `set` calls (CLI flags) override file values. Every
// command validates its key set against an allow-list and echoes the
// effective configuration into its output directory, sorted by key, so a
// run can be reproduced from the echo alone.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_stream(std::istream& in);  // ParseError with line numbers

  void set(std::string key, std::string value);
  void set_kv(const std::string& kv);  // "key=value"; ConfigInvalid otherwise

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated value; empty when the key is absent.
  std::vector<std::string> get_list(const std::string& key) const;

  // ConfigInvalid naming the first key outside `allowed`.
  void require_known(const std::vector<std::string>& allowed) const;

  std::string echo() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mvet
