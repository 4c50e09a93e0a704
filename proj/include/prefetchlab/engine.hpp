#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <vector>

#include "prefetchlab/cache.hpp"
#include "prefetchlab/prefetcher.hpp"

namespace prefetchlab {

// Accuracy-feedback degree controller: after every `window` resolved
// prefetches, halves the degree below `low` accuracy and doubles it above
// `high`, staying within [1, configured degree].
struct AdaptiveDegree {
  bool enabled = false;
  std::size_t window = 256;
  double low = 0.4;
  double high = 0.8;
};

struct EngineOptions {
  std::size_t degree = 4;
  Seq memory_latency = 32;
  AdaptiveDegree adaptive;
};

struct EngineCounters {
  std::uint64_t demand_accesses = 0;
  std::uint64_t demand_hits = 0;
  std::uint64_t demand_misses = 0;
  std::uint64_t prefetch_hits = 0;
  std::uint64_t late_prefetch_hits = 0;
  std::uint64_t issued = 0;
  std::uint64_t useful = 0;
  std::uint64_t evicted_unused = 0;
  std::uint64_t degree_truncations = 0;
};

struct IssueRecord {
  Seq seq = 0;
  Seq trigger_seq = 0;
  BlockAddress block = 0;
  std::uint32_t rank = 0;
  friend bool operator==(const IssueRecord&, const IssueRecord&) = default;
};

// Hosts one prefetcher in front of one cache. Routes triggers to the
// prefetcher, filters its candidates and issues at most `degree` per trigger.
class Engine {
 public:
  Engine(const CacheConfig& cache, std::unique_ptr<Prefetcher> prefetcher, EngineOptions options);

  // Processes one trace event and returns the prefetches issued during it,
  // including deferred requests whose metadata wait ended at this event.
  std::vector<PrefetchRequest> dispatch(const AccessEvent& event);

  void set_degree(std::size_t degree);
  std::size_t degree() const { return degree_; }

  // Counters only include events (and prefetches issued) at or after `seq`.
  void count_from(Seq seq) { count_from_ = seq; }

  void enable_issue_log() { log_issues_ = true; }
  const std::vector<IssueRecord>& issue_log() const { return issue_log_; }

  const EngineCounters& counters() const { return counters_; }
  const AccessOutcome& last_outcome() const { return last_outcome_; }
  Cache& cache() { return cache_; }
  const Cache& cache() const { return cache_; }
  const SimClock& clock() const { return clock_; }
  Prefetcher& prefetcher() { return *prefetcher_; }
  const Prefetcher& prefetcher() const { return *prefetcher_; }

 private:
  struct Deferred {
    Seq ready = 0;
    PrefetchRequest request;
  };

  bool counting(Seq seq) const { return seq >= count_from_; }
  void forward_evictions();
  void resolve(bool useful);
  void account(const AccessOutcome& outcome, Seq seq);
  void issue(const PrefetchRequest& req, std::vector<PrefetchRequest>& out);
  void release_deferred(std::vector<PrefetchRequest>& out);
  bool pending(BlockAddress block) const;
  void filter_and_issue(std::vector<PrefetchRequest> candidates, const AccessEvent& event,
                        BlockAddress demand_block, std::vector<PrefetchRequest>& out);

  Cache cache_;
  SimClock clock_;
  std::unique_ptr<Prefetcher> prefetcher_;
  EngineOptions options_;
  std::size_t degree_;
  Seq count_from_ = 0;
  EngineCounters counters_;
  AccessOutcome last_outcome_;
  std::deque<Deferred> deferred_;
  bool log_issues_ = false;
  std::vector<IssueRecord> issue_log_;
  // Resolution history for the adaptive controller; true = useful.
  std::deque<bool> resolutions_;
  std::size_t since_adjust_ = 0;
};

}  // namespace prefetchlab
