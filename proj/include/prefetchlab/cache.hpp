#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "prefetchlab/core.hpp"

namespace prefetchlab {

struct InFlight {
  BlockAddress block = 0;
  Seq issue_seq = 0;
  Seq completion_seq = 0;
};

// Event-ordered clock. A prefetch issued at seq s completes at s + latency and
// is drained before the event with that sequence number is processed.
class SimClock {
 public:
  explicit SimClock(Seq latency = 32) : latency_(latency) {}

  Seq now() const { return now_; }
  Seq latency() const { return latency_; }
  void advance_to(Seq seq) { now_ = seq; }

  void start(BlockAddress block, Seq issue_seq);
  bool in_flight(BlockAddress block) const { return pending_.contains(block); }
  std::optional<InFlight> cancel(BlockAddress block);
  // Removes and returns every request with completion_seq <= now, oldest first.
  std::vector<InFlight> drain();
  void clear();
  std::size_t in_flight_count() const { return pending_.size(); }

 private:
  Seq latency_;
  Seq now_ = 0;
  std::unordered_map<BlockAddress, InFlight> pending_;
  std::deque<InFlight> order_;
};

enum class Placement { kInCache, kAuxBuffer };

struct CacheConfig {
  std::size_t sets = 64;
  std::size_t ways = 8;
  std::uint64_t block_size = 64;
  Placement placement = Placement::kInCache;
  std::size_t buffer_entries = 16;

  void validate() const;
};

enum class AccessClass { kDemandHit, kDemandMiss, kPrefetchHit, kLatePrefetchHit };

const char* to_string(AccessClass c);

struct Eviction {
  BlockAddress block = 0;
  bool prefetched_unused = false;
  // Issue sequence of the prefetch that brought the block in, if any.
  std::optional<Seq> prefetch_issue_seq;
};

struct AccessOutcome {
  AccessClass cls = AccessClass::kDemandMiss;
  std::optional<BlockAddress> evicted;
  bool evicted_was_prefetched_unused = false;
  // Set for prefetch-hit and late-prefetch-hit: when the covering prefetch was issued.
  std::optional<Seq> prefetch_issue_seq;

  // Misses and first touches of prefetched blocks activate the prefetcher.
  bool is_trigger() const { return cls != AccessClass::kDemandHit; }
};

// Single-level set-associative cache with LRU replacement and an optional
// auxiliary prefetch buffer.
class Cache {
 public:
  explicit Cache(CacheConfig config);

  const CacheConfig& config() const { return config_; }

  AccessOutcome access(BlockAddress block, SimClock& clock);

  // Registers a prefetch in flight. The caller guarantees the block is
  // neither resident nor already in flight.
  void insert_prefetch(BlockAddress block, SimClock& clock);

  // Places every prefetch whose completion time has been reached.
  std::size_t complete_fills(SimClock& clock);

  // Displaced valid blocks since the last drain, in displacement order.
  std::vector<Eviction> drain_evictions();

  void flush(SimClock& clock);

  bool resident(BlockAddress block) const;
  bool in_buffer(BlockAddress block) const;
  bool prefetched_unused(BlockAddress block) const;
  std::size_t residency() const;

 private:
  struct Line {
    BlockAddress block = 0;
    std::uint64_t stamp = 0;
    std::optional<Seq> prefetch_issue_seq;
    bool prefetched = false;
    bool valid = false;
  };

  std::size_t set_index(BlockAddress block) const { return block % config_.sets; }
  Line* find_line(BlockAddress block);
  const Line* find_line(BlockAddress block) const;
  // Fills `block` at MRU, evicting the LRU way if the set is full.
  Line& fill(BlockAddress block, bool prefetched, std::optional<Seq> issue_seq,
             AccessOutcome* outcome);

  CacheConfig config_;
  std::vector<Line> lines_;
  // Auxiliary buffer, LRU order: front is least recent.
  std::deque<Line> buffer_;
  std::vector<Eviction> evictions_;
  std::uint64_t stamp_ = 0;
};

}  // namespace prefetchlab
