#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prefetchlab/engine.hpp"

namespace prefetchlab {

struct MetricsReport {
  std::string label;
  std::string prefetcher;
  std::string source;
  std::uint64_t degree = 0;
  std::uint64_t events = 0;
  std::uint64_t warmup_events = 0;
  EngineCounters counters;
  MetadataTraffic metadata;
  std::uint64_t metadata_bytes = 0;
  std::map<std::string, std::uint64_t> extra;

  // (prefetch + late prefetch hits) / (those + demand misses)
  double coverage() const;
  double accuracy() const;
  double timeliness() const;
};

// CSV column order; report.json rows use the same keys in the same order
// followed by an "extra" object.
const std::vector<std::string>& report_columns();

std::string csv_header();
std::string to_csv_row(const MetricsReport& r);
std::string to_csv(const std::vector<MetricsReport>& rows);
std::string to_json(const std::vector<MetricsReport>& rows);

}  // namespace prefetchlab
