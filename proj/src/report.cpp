#include "prefetchlab/report.hpp"

#include <cstdio>

#include "json.hpp"

namespace prefetchlab {
namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Column values as strings, in report_columns() order.
std::vector<std::string> cells(const MetricsReport& r) {
  const auto& c = r.counters;
  const auto n = [](std::uint64_t v) { return std::to_string(v); };
  return {r.label,
          r.prefetcher,
          r.source,
          n(r.degree),
          n(r.events),
          n(r.warmup_events),
          n(c.demand_accesses),
          n(c.demand_hits),
          n(c.demand_misses),
          n(c.prefetch_hits),
          n(c.late_prefetch_hits),
          n(c.issued),
          n(c.useful),
          n(c.evicted_unused),
          fixed(r.coverage()),
          fixed(r.accuracy()),
          fixed(r.timeliness()),
          n(r.metadata.reads),
          n(r.metadata.writes),
          n(r.metadata_bytes),
          n(r.metadata.stream_starts),
          n(r.metadata.stream_start_reads),
          n(c.degree_truncations)};
}

}  // namespace

double MetricsReport::coverage() const {
  const auto covered = counters.prefetch_hits + counters.late_prefetch_hits;
  return ratio(covered, covered + counters.demand_misses);
}

double MetricsReport::accuracy() const { return ratio(counters.useful, counters.issued); }

double MetricsReport::timeliness() const {
  return ratio(counters.prefetch_hits, counters.prefetch_hits + counters.late_prefetch_hits);
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "label",          "prefetcher",      "source",         "degree",
      "events",         "warmup_events",   "demand_accesses", "demand_hits",
      "demand_misses",  "prefetch_hits",   "late_prefetch_hits", "issued",
      "useful",         "evicted_unused",  "coverage",       "accuracy",
      "timeliness",     "metadata_reads",  "metadata_writes", "metadata_bytes",
      "stream_starts",  "stream_start_reads", "degree_truncations"};
  return cols;
}

std::string csv_header() {
  std::string out;
  for (const auto& c : report_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string to_csv_row(const MetricsReport& r) {
  std::string out;
  bool first = true;
  for (const auto& v : cells(r)) {
    if (!first) out += ',';
    first = false;
    out += csv_escape(v);
  }
  return out;
}

std::string to_csv(const std::vector<MetricsReport>& rows) {
  std::string out = csv_header() + "\n";
  for (const auto& r : rows) out += to_csv_row(r) + "\n";
  return out;
}

std::string to_json(const std::vector<MetricsReport>& rows) {
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json obj;
    const auto values = cells(r);
    const auto& cols = report_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& col = cols[i];
      if (i < 3) {
        obj[col] = values[i];
      } else if (col == "coverage") {
        obj[col] = r.coverage();
      } else if (col == "accuracy") {
        obj[col] = r.accuracy();
      } else if (col == "timeliness") {
        obj[col] = r.timeliness();
      } else {
        obj[col] = std::stoull(values[i]);
      }
    }
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.extra) extra[k] = v;
    obj["extra"] = extra;
    runs.push_back(obj);
  }
  nlohmann::ordered_json doc;
  doc["runs"] = runs;
  return doc.dump(2) + "\n";
}

}  // namespace prefetchlab
