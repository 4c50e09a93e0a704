#include "prefetchlab/runner.hpp"

#include <cmath>

#include "prefetchlab/factory.hpp"
#include "prefetchlab/workload.hpp"

namespace prefetchlab {

CacheConfig cache_config_from(const Config& c) {
  CacheConfig cc;
  cc.sets = c.get_uint("cache.sets", cc.sets);
  cc.ways = c.get_uint("cache.ways", cc.ways);
  cc.block_size = c.get_uint("cache.block_size", cc.block_size);
  cc.buffer_entries = c.get_uint("cache.buffer_entries", cc.buffer_entries);
  const std::string placement = c.get_string("cache.placement", "cache");
  if (placement == "cache") {
    cc.placement = Placement::kInCache;
  } else if (placement == "buffer") {
    cc.placement = Placement::kAuxBuffer;
  } else {
    throw ConfigError("cache.placement must be 'cache' or 'buffer', got '" + placement + "'");
  }
  cc.validate();
  return cc;
}

EngineOptions engine_options_from(const Config& c) {
  EngineOptions o;
  o.degree = c.get_uint("prefetcher.degree", o.degree);
  o.memory_latency = c.get_uint("memory.latency_events", o.memory_latency);
  o.adaptive.enabled = c.get_bool("prefetcher.adaptive", false);
  return o;
}

std::size_t warmup_events(const Config& c, std::size_t n) {
  if (c.has("warmup.events")) return std::min<std::size_t>(c.get_uint("warmup.events", 0), n);
  const double f = c.get_double("warmup", 0.1);
  if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("warmup must be a fraction in [0, 1]");
  return static_cast<std::size_t>(std::floor(f * static_cast<double>(n)));
}

MetricsReport simulate(const Config& config, const Trace& trace, const std::string& source,
                       const std::string& label) {
  const Geometry geometry = geometry_from(config);
  const EngineOptions options = engine_options_from(config);
  Engine engine(cache_config_from(config), make_prefetcher(config, geometry), options);

  const std::size_t warm = warmup_events(config, trace.size());
  engine.count_from(warm < trace.size() ? trace[warm].seq : (trace.empty() ? 0 : trace.back().seq + 1));
  MetadataTraffic at_warmup;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i == warm) at_warmup = engine.prefetcher().metadata();
    engine.dispatch(trace[i]);
  }
  if (warm >= trace.size()) at_warmup = engine.prefetcher().metadata();

  MetricsReport r;
  r.label = label;
  r.prefetcher = std::string(engine.prefetcher().name());
  r.source = source;
  r.degree = options.degree;
  r.events = trace.size();
  r.warmup_events = warm;
  r.counters = engine.counters();
  r.metadata = engine.prefetcher().metadata() - at_warmup;
  r.metadata_bytes = r.metadata.bytes(geometry.block_bytes);
  r.extra = engine.prefetcher().stats();
  return r;
}

std::string TraceSource::describe() const {
  if (trace) return trace->filename().string();
  if (workload) return *workload;
  return "";
}

Trace load_trace_source(const TraceSource& source, const Geometry& geometry) {
  if (source.trace.has_value() == source.workload.has_value()) {
    throw ConfigError("exactly one of --trace or --workload is required");
  }
  if (source.trace) return read_trace(*source.trace);
  return generate_workload(*source.workload, geometry);
}

std::vector<SweepPoint> expand_sweep(const Config& base, const std::vector<std::string>& axes) {
  std::vector<SweepPoint> points{{"", base}};
  for (const auto& axis : axes) {
    const auto eq = axis.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("sweep axis must be key=v1,v2,...: '" + axis + "'");
    std::string key = axis.substr(0, eq);
    if (!Config::is_known_key(key) && Config::is_known_key("prefetcher." + key)) key = "prefetcher." + key;
    std::vector<std::string> values;
    std::string rest = axis.substr(eq + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      const auto v = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (v.empty()) throw ConfigError("empty value in sweep axis '" + axis + "'");
      values.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    std::vector<SweepPoint> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        SweepPoint q = p;
        q.config.set(key, v);
        q.label += (q.label.empty() ? "" : ";") + key + "=" + v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

}  // namespace prefetchlab
