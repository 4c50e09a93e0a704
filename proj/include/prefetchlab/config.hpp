#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prefetchlab {

// Flat `key = value` experiment configuration. Unknown keys are rejected so
// that typos surface as configuration errors instead of silent defaults.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  static bool is_known_key(std::string_view key);
  static const std::vector<std::string>& known_keys();

  void set(const std::string& key, const std::string& value);
  // Parses "key=value".
  void set_assignment(std::string_view assignment);
  bool has(const std::string& key) const { return values_.contains(key); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Inclusive integer range written as "lo..hi".
  std::pair<std::int64_t, std::int64_t> get_range(const std::string& key,
                                                  std::pair<std::int64_t, std::int64_t> fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace prefetchlab
