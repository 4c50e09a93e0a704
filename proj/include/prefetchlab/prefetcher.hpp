#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "prefetchlab/cache.hpp"
#include "prefetchlab/core.hpp"

namespace prefetchlab {

struct PrefetchRequest {
  BlockAddress block = 0;
  // Lookahead position; 1 is the access expected soonest.
  std::uint32_t rank = 1;
  std::string_view source;
  Seq trigger_seq = 0;
  // Events that must elapse before the request can leave the prefetcher,
  // i.e. the modeled wait for off-chip metadata.
  Seq delay = 0;

  friend bool operator==(const PrefetchRequest& a, const PrefetchRequest& b) {
    return a.block == b.block && a.rank == b.rank && a.trigger_seq == b.trigger_seq &&
           a.delay == b.delay;
  }
};

// Off-chip metadata traffic. Every read or write moves one cache block.
struct MetadataTraffic {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t stream_starts = 0;
  // Serial reads that had to complete before a stream's first prefetch.
  std::uint64_t stream_start_reads = 0;

  std::uint64_t bytes(std::uint64_t block_bytes = 64) const { return (reads + writes) * block_bytes; }

  MetadataTraffic operator-(const MetadataTraffic& o) const {
    return {reads - o.reads, writes - o.writes, stream_starts - o.stream_starts,
            stream_start_reads - o.stream_start_reads};
  }
};

// Uniform interface the engine drives. Prefetchers read access outcomes but
// never touch cache state; the engine filters and issues what they return.
class Prefetcher {
 public:
  virtual ~Prefetcher() = default;

  virtual std::string_view name() const = 0;

  // Demand misses, prefetch hits and late prefetch hits.
  virtual std::vector<PrefetchRequest> on_trigger(const AccessEvent& event,
                                                  const AccessOutcome& outcome) = 0;

  // Demand hits, which do not trigger prefetching but may still train.
  virtual void observe(const AccessEvent& /*event*/, const AccessOutcome& /*outcome*/) {}

  virtual void on_eviction(BlockAddress /*block*/, bool /*was_prefetched_unused*/) {}

  virtual MetadataTraffic metadata() const { return {}; }

  // Mechanism-specific counters reported alongside the standard metrics.
  virtual std::map<std::string, std::uint64_t> stats() const { return {}; }
};

// Baseline that never prefetches.
class NoPrefetcher final : public Prefetcher {
 public:
  std::string_view name() const override { return "none"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent&, const AccessOutcome&) override {
    return {};
  }
};

}  // namespace prefetchlab
