#include "prefetchlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "prefetchlab/core.hpp"

namespace prefetchlab {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys = {
      "prefetcher.name", "prefetcher.degree", "prefetcher.adaptive",
      "cache.sets", "cache.ways", "cache.block_size", "cache.placement", "cache.buffer_entries",
      "memory.latency_events", "metadata.latency_events", "warmup", "warmup.events",
      "region.blocks",
      "ibsp.entries", "ibsp.ways", "ibsp.lookahead",
      "offset.range", "offset.window", "sp.threshold", "mlop.levels", "mlop.window", "mlop.amt_rows",
      "sms.pht_entries", "sms.pht_ways", "sms.generation_timeout",
      "vldp.dpt_orders", "vldp.dpt_entries", "vldp.dhb_entries",
      "bingo.sets", "bingo.ways",
      "stms.history_entries", "stms.index_entries", "stms.index_ways", "stms.streams",
      "domino.rows", "domino.super_entries", "domino.entries",
      "isb.chunk", "isb.onchip_pages",
      "stems.rmob_entries", "stems.pst_entries", "stems.lookback",
      "rmd.backend", "rmd.cap", "rmd.entries", "rmd.ways", "rmd.naive_degree",
  };
  return keys;
}

bool Config::is_known_key(std::string_view key) {
  const auto& keys = known_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

Config Config::parse(std::string_view text) {
  Config cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      cfg.set_assignment(line);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Config::set(const std::string& key, const std::string& value) {
  if (!is_known_key(key)) throw ConfigError("unknown configuration key '" + key + "'");
  values_[key] = value;
}

void Config::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  }
  set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  if (!parse_number(it->second, v)) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + it->second + "'");
  }
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0;
  if (!parse_number(it->second, v)) {
    throw ConfigError(key + ": expected a number, got '" + it->second + "'");
  }
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::pair<std::int64_t, std::int64_t> Config::get_range(
    const std::string& key, std::pair<std::int64_t, std::int64_t> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string_view v = it->second;
  const auto dots = v.find("..");
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  if (dots == std::string_view::npos || !parse_number(trim(v.substr(0, dots)), lo) ||
      !parse_number(trim(v.substr(dots + 2)), hi) || lo > hi) {
    throw ConfigError(key + ": expected a range 'lo..hi', got '" + it->second + "'");
  }
  return {lo, hi};
}

}  // namespace prefetchlab
