#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prefetchlab/config.hpp"
#include "prefetchlab/engine.hpp"
#include "prefetchlab/report.hpp"
#include "prefetchlab/trace.hpp"

namespace prefetchlab {

CacheConfig cache_config_from(const Config& config);
EngineOptions engine_options_from(const Config& config);

// Events excluded from the counters: `warmup.events` when set, otherwise the
// `warmup` fraction (default 0.1) of the trace.
std::size_t warmup_events(const Config& config, std::size_t trace_events);

// Runs one simulation and collects its report. `source` and `label` are
// copied into the report verbatim.
MetricsReport simulate(const Config& config, const Trace& trace, const std::string& source,
                       const std::string& label = "");

struct TraceSource {
  std::optional<std::filesystem::path> trace;
  std::optional<std::string> workload;

  std::string describe() const;
};

Trace load_trace_source(const TraceSource& source, const Geometry& geometry);

struct SweepPoint {
  std::string label;
  Config config;
};

// Cartesian product of "key=v1,v2,..." axes over `base`. Keys may omit the
// "prefetcher." prefix (degree=1,2,4).
std::vector<SweepPoint> expand_sweep(const Config& base, const std::vector<std::string>& axes);

}  // namespace prefetchlab
