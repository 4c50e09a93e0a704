#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "prefetchlab/assoc_table.hpp"
#include "prefetchlab/prefetcher.hpp"

namespace prefetchlab {

// ---------------------------------------------------------------------------
// Region generations: the interval from a region's first access until one of
// its blocks leaves the cache (or the generation goes stale).
// ---------------------------------------------------------------------------

struct Generation {
  std::uint64_t region = 0;
  Addr trigger_pc = 0;
  BlockAddress trigger_block = 0;
  std::uint32_t trigger_offset = 0;
  std::uint64_t footprint = 0;
  Seq last_access = 0;
};

class GenerationTracker {
 public:
  GenerationTracker(Geometry geometry, Seq timeout);

  // Records an access. Returns true when it opened a new generation.
  bool record(const AccessEvent& event);
  std::optional<Generation> close_on_eviction(BlockAddress block);
  // Closes generations idle for at least the timeout, in region order.
  std::vector<Generation> expire(Seq now);
  const Generation* find(std::uint64_t region) const;
  std::size_t open_count() const { return open_.size(); }

 private:
  Geometry geometry_;
  Seq timeout_;
  Seq last_sweep_ = 0;
  std::map<std::uint64_t, Generation> open_;
};

// Requests for every set bit of `footprint` except the trigger offset, ranked
// by distance from the trigger (ties: lower offset first).
std::vector<PrefetchRequest> footprint_requests(const Geometry& geometry, std::uint64_t region,
                                                std::uint32_t trigger_offset, std::uint64_t footprint,
                                                std::string_view source, Seq trigger_seq);

struct PcOffset {
  Addr pc = 0;
  std::uint32_t offset = 0;
  friend bool operator==(const PcOffset&, const PcOffset&) = default;
};

struct PcOffsetHash {
  std::size_t operator()(const PcOffset& k) const {
    return static_cast<std::size_t>(mix64(k.pc * 131 + k.offset));
  }
};

// ---------------------------------------------------------------------------
// SMS: footprints keyed by PC+Offset of the region trigger
// ---------------------------------------------------------------------------

struct SmsParams {
  std::size_t pht_entries = 2048;
  std::size_t pht_ways = 8;
  Seq generation_timeout = 4096;
};

using PatternHistoryTable = AssocTable<PcOffset, std::uint64_t, PcOffsetHash>;

class SmsPrefetcher final : public Prefetcher {
 public:
  SmsPrefetcher(Geometry geometry, SmsParams params);
  std::string_view name() const override { return "sms"; }

  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  void observe(const AccessEvent& event, const AccessOutcome& outcome) override;
  void on_eviction(BlockAddress block, bool was_prefetched_unused) override;

  // Updates generations for one access; returns true when it was a region trigger.
  bool sms_observe(const AccessEvent& event);
  std::vector<PrefetchRequest> sms_predict(const AccessEvent& event);

  const PatternHistoryTable& pht() const { return pht_; }
  const GenerationTracker& generations() const { return generations_; }

 private:
  void store(const Generation& g);

  Geometry geometry_;
  GenerationTracker generations_;
  PatternHistoryTable pht_;
};

// ---------------------------------------------------------------------------
// Bingo: one history table indexed by PC+Offset, tagged by PC+Address
// ---------------------------------------------------------------------------

struct BingoParams {
  std::size_t sets = 1024;
  std::size_t ways = 16;
  Seq generation_timeout = 4096;
};

enum class BingoMatch { kNone, kLong, kShort };

class BingoHistoryTable {
 public:
  BingoHistoryTable(Geometry geometry, std::size_t sets, std::size_t ways);

  std::size_t set_of(Addr pc, std::uint32_t offset) const;
  void insert(Addr pc, BlockAddress trigger_block, std::uint64_t footprint);
  // Long-event match first; otherwise the most recently written entry of the
  // set whose PC and offset bits match.
  std::optional<std::uint64_t> lookup(Addr pc, BlockAddress trigger_block, BingoMatch* match = nullptr);

  std::size_t sets() const { return sets_; }
  std::size_t ways() const { return ways_; }
  // Number of valid entries in `set` (for tests).
  std::size_t occupancy(std::size_t set) const;
  std::uint64_t evictions() const { return evictions_; }

 private:
  struct Entry {
    Addr pc = 0;
    BlockAddress block = 0;
    std::uint64_t footprint = 0;
    std::uint64_t used = 0;     // replacement recency
    std::uint64_t written = 0;  // short-event recency
    bool valid = false;
  };

  Geometry geometry_;
  std::size_t sets_;
  std::size_t ways_;
  std::vector<Entry> entries_;
  std::uint64_t clock_ = 0;
  std::uint64_t evictions_ = 0;
};

class BingoPrefetcher final : public Prefetcher {
 public:
  BingoPrefetcher(Geometry geometry, BingoParams params);
  std::string_view name() const override { return "bingo"; }

  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  void observe(const AccessEvent& event, const AccessOutcome& outcome) override;
  void on_eviction(BlockAddress block, bool was_prefetched_unused) override;
  std::map<std::string, std::uint64_t> stats() const override;

  const BingoHistoryTable& table() const { return table_; }

 private:
  void expire(Seq now);

  Geometry geometry_;
  GenerationTracker generations_;
  BingoHistoryTable table_;
  std::uint64_t long_matches_ = 0;
  std::uint64_t short_matches_ = 0;
};

// ---------------------------------------------------------------------------
// VLDP: delta history per active region, delta prediction tables of several
// orders and an offset prediction table for first accesses
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxDeltaOrder = 3;

// Most recent delta first.
using DeltaHistory = std::array<Delta, kMaxDeltaOrder>;

struct DhbRow {
  std::uint32_t last_offset = 0;
  DeltaHistory deltas{};
  std::uint32_t delta_count = 0;
  std::uint32_t first_offset = 0;
  std::uint32_t num_accesses = 0;
};

// Direct-mapped table mapping the `order` most recent deltas to the next one.
class DeltaPredictionTable {
 public:
  DeltaPredictionTable(std::size_t order, std::size_t entries);
  std::size_t order() const { return order_; }
  // `history` holds at least `order` deltas, most recent first.
  std::optional<Delta> lookup(std::span<const Delta> history) const;
  void update(std::span<const Delta> history, Delta next);

 private:
  struct Slot {
    DeltaHistory key{};
    Delta next = 0;
    bool valid = false;
  };
  std::size_t index(std::span<const Delta> history) const;

  std::size_t order_;
  std::vector<Slot> slots_;
};

struct LongestMatchStats {
  std::uint64_t lookups = 0;
  std::uint64_t multi_hits = 0;
  std::uint64_t conflicting_hits = 0;
  // Predictions taken from a lower order while a higher order also hit.
  std::uint64_t violations = 0;
};

// Queries every table whose order fits `available` deltas and returns the
// prediction of the highest-order hit.
std::optional<Delta> vldp_longest_match(std::span<const DeltaPredictionTable> tables,
                                        std::span<const Delta> history, std::size_t available,
                                        LongestMatchStats* stats = nullptr);

struct VldpParams {
  std::size_t dpt_orders = 3;
  std::size_t dpt_entries = 64;
  std::size_t dhb_entries = 16;
  std::size_t degree = 4;
};

class VldpPrefetcher final : public Prefetcher {
 public:
  VldpPrefetcher(Geometry geometry, VldpParams params);
  std::string_view name() const override { return "vldp"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  std::map<std::string, std::uint64_t> stats() const override;

  std::span<DeltaPredictionTable> dpts() { return dpts_; }
  const LongestMatchStats& match_stats() const { return match_stats_; }
  std::optional<Delta> opt(std::uint32_t offset) const { return opt_.at(offset); }

 private:
  Geometry geometry_;
  VldpParams params_;
  AssocTable<std::uint64_t, DhbRow, MixHash> dhb_;
  std::vector<DeltaPredictionTable> dpts_;
  std::vector<std::optional<Delta>> opt_;
  LongestMatchStats match_stats_;
  std::uint64_t opt_predictions_ = 0;
};

}  // namespace prefetchlab
