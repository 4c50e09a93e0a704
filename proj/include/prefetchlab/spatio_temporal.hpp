#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <unordered_set>
#include <vector>

#include "prefetchlab/spatial.hpp"

namespace prefetchlab {

struct RmobRecord {
  Addr pc = 0;
  BlockAddress trigger = 0;
  // Spatial events observed after this trigger and before the next one.
  std::uint32_t spatial_count = 0;
  friend bool operator==(const RmobRecord&, const RmobRecord&) = default;
};

// Region miss order buffer: circular FIFO of region triggers with absolute
// positions, like the STMS history table.
class Rmob {
 public:
  explicit Rmob(std::size_t capacity);
  std::uint64_t append(const RmobRecord& record);
  std::optional<RmobRecord> read(std::uint64_t pos) const;
  void count_spatial();
  std::uint64_t head() const { return head_; }
  std::uint64_t oldest() const { return head_ > slots_.size() ? head_ - slots_.size() : 0; }

 private:
  struct Slot {
    RmobRecord record;
    std::uint64_t pos = 0;
    bool valid = false;
  };
  std::vector<Slot> slots_;
  std::uint64_t head_ = 0;
};

struct PstOffset {
  std::uint32_t offset = 0;
  // Triggers seen since the region's previous recorded event.
  std::uint32_t delta = 0;
  friend bool operator==(const PstOffset&, const PstOffset&) = default;
};

using PatternSequenceTable = AssocTable<PcOffset, std::vector<PstOffset>, PcOffsetHash>;

// Lazily merges the temporal stream of region triggers that follows an RMOB
// position with the ordered spatial patterns of those regions.
class Reconstruction {
 public:
  Reconstruction(const Rmob& rmob, const PatternSequenceTable& pst, const Geometry& geometry,
                 std::uint64_t matched_pos, std::size_t lookback);

  std::optional<BlockAddress> next();
  std::uint64_t records_read() const { return records_read_; }

 private:
  struct Active {
    std::uint64_t region = 0;
    std::deque<PstOffset> pending;
    std::uint32_t counter = 0;
  };

  void enter(const RmobRecord& record);
  std::optional<BlockAddress> take_spatial();

  const Rmob* rmob_;
  const PatternSequenceTable* pst_;
  Geometry geometry_;
  std::deque<Active> active_;  // oldest first
  std::uint64_t next_record_ = 0;
  std::uint32_t budget_ = 0;
  std::uint64_t records_read_ = 0;
};

// The first `count` blocks predicted after the RMOB record at `matched_pos`.
std::vector<BlockAddress> stems_reconstruct(const Rmob& rmob, const PatternSequenceTable& pst,
                                            const Geometry& geometry, std::uint64_t matched_pos,
                                            std::size_t count, std::size_t lookback);

struct StemsParams {
  std::size_t rmob_entries = std::size_t{1} << 16;
  std::size_t index_entries = std::size_t{1} << 15;
  std::size_t index_ways = 8;
  std::size_t pst_entries = 2048;
  std::size_t pst_ways = 8;
  std::size_t lookback = 8;
  std::size_t degree = 4;
  Seq generation_timeout = 4096;
};

class StemsPrefetcher final : public Prefetcher {
 public:
  StemsPrefetcher(Geometry geometry, StemsParams params);
  std::string_view name() const override { return "stems"; }

  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  void observe(const AccessEvent& event, const AccessOutcome& outcome) override;
  void on_eviction(BlockAddress block, bool was_prefetched_unused) override;
  MetadataTraffic metadata() const override { return traffic_; }
  std::map<std::string, std::uint64_t> stats() const override;

  // Updates RMOB and generation state for one access.
  void stems_record(const AccessEvent& event);
  // Prediction for `event` if it is a region trigger with recorded history;
  // does not change any state.
  std::vector<BlockAddress> preview(const AccessEvent& event, std::size_t count) const;
  // Closes every open generation into the PST.
  void close_all();

  bool is_region_trigger(BlockAddress block) const;
  const Rmob& rmob() const { return rmob_; }
  const PatternSequenceTable& pst() const { return pst_; }

 private:
  struct OpenRegion {
    Addr pc = 0;
    std::uint32_t trigger_offset = 0;
    std::uint64_t footprint = 0;
    std::vector<PstOffset> sequence;
    std::uint64_t last_temporal = 0;
    Seq last_access = 0;
  };

  void close(std::map<std::uint64_t, OpenRegion>::iterator it);
  void expire(Seq now);

  Geometry geometry_;
  StemsParams params_;
  Rmob rmob_;
  AssocTable<BlockAddress, std::uint64_t, MixHash> index_;
  PatternSequenceTable pst_;
  std::map<std::uint64_t, OpenRegion> open_;
  std::uint64_t temporal_count_ = 0;
  Seq last_sweep_ = 0;

  std::optional<Reconstruction> recon_;
  std::unordered_set<BlockAddress> outstanding_;
  MetadataTraffic traffic_;
  std::uint64_t reconstructions_ = 0;
};

}  // namespace prefetchlab
