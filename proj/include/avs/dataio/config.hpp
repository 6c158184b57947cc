#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace avs::dataio {

/// Flat INI-style settings: `[section]` headers and `key = value` lines are
/// stored as "section.key". `#` and `;` start comments.
class Config {
 public:
  Config() = default;
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::filesystem::path& path);

  /// Applies "section.key=value" overrides (e.g. from the command line).
  void apply_overrides(const std::vector<std::string>& assignments);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Serialises back to INI text, grouped by section in key order.
  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace avs::dataio
