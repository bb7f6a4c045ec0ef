#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace heatrl {

/// Flat `key = value` file. `[section]` lines prefix the following keys with
/// `section.`; `#` starts a comment. Lookups record which keys were used so
/// that typos can be reported.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;

  /// Assigns `out` when the key is present.
  void read(const std::string& key, double& out) const;
  void read(const std::string& key, int& out) const;
  void read(const std::string& key, std::size_t& out) const;
  void read(const std::string& key, bool& out) const;
  void read(const std::string& key, std::string& out) const;

  std::vector<std::string> unused_keys() const;
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace heatrl
