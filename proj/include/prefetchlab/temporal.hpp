#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "prefetchlab/assoc_table.hpp"
#include "prefetchlab/prefetcher.hpp"

namespace prefetchlab {

// Circular FIFO of miss blocks addressed by absolute position. A position is
// readable while it has not been overwritten by a later append.
class HistoryTable {
 public:
  // Number of history entries that fit in one metadata block.
  static constexpr std::uint64_t kEntriesPerBlock = 8;

  explicit HistoryTable(std::size_t capacity);

  std::uint64_t append(BlockAddress block);
  std::optional<BlockAddress> read(std::uint64_t pos) const;
  // Position the next append will take.
  std::uint64_t head() const { return head_; }
  std::size_t capacity() const { return slots_.size(); }
  void clear();

 private:
  struct Slot {
    BlockAddress block = 0;
    std::uint64_t pos = 0;
    bool valid = false;
  };
  std::vector<Slot> slots_;
  std::uint64_t head_ = 0;
};

using IndexTable = AssocTable<BlockAddress, std::uint64_t, MixHash>;

void stms_train(BlockAddress miss, HistoryTable& ht, IndexTable& it);

// Up to `degree` blocks that followed the latest recorded occurrence of
// `miss`. Stale index pointers count as a miss. `pointer` receives the
// position of that occurrence.
std::vector<BlockAddress> stms_predict(BlockAddress miss, const HistoryTable& ht, const IndexTable& it,
                                       std::size_t degree, std::uint64_t* pointer = nullptr);

// When a prefetcher's first request for a stream becomes issuable.
struct StreamStart {
  Seq trigger_seq = 0;
  Seq first_ready = 0;
};

struct TemporalParams {
  std::size_t history_entries = std::size_t{1} << 16;
  std::size_t index_entries = std::size_t{1} << 15;
  std::size_t index_ways = 8;
  std::size_t streams = 4;
  std::size_t degree = 4;
  Seq metadata_latency = 0;
  std::uint64_t block_bytes = 64;
};

class StmsPrefetcher final : public Prefetcher {
 public:
  explicit StmsPrefetcher(TemporalParams params);
  std::string_view name() const override { return "stms"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  MetadataTraffic metadata() const override { return traffic_; }
  std::map<std::string, std::uint64_t> stats() const override;

  void log_stream_starts() { log_starts_ = true; }
  const std::vector<StreamStart>& stream_starts() const { return starts_; }
  const HistoryTable& history() const { return ht_; }
  const IndexTable& index() const { return it_; }

 private:
  struct Stream {
    std::uint64_t next_pos = 0;
    std::unordered_set<BlockAddress> outstanding;
  };

  void read_history(std::uint64_t pos);

  TemporalParams params_;
  HistoryTable ht_;
  IndexTable it_;
  std::list<Stream> streams_;  // front = most recently used
  MetadataTraffic traffic_;
  std::uint64_t appended_ = 0;
  std::uint64_t stream_advances_ = 0;
  bool log_starts_ = false;
  std::vector<StreamStart> starts_;
};

// ---------------------------------------------------------------------------
// Domino
// ---------------------------------------------------------------------------

struct EitEntry {
  BlockAddress next = 0;
  // History position of `next`.
  std::uint64_t pos = 0;
  std::uint64_t stamp = 0;
};

struct SuperEntry {
  BlockAddress tag = 0;
  std::vector<EitEntry> entries;
  std::uint64_t stamp = 0;
  bool valid = false;

  const EitEntry* mru() const;
  const EitEntry* match(BlockAddress next) const;
};

// Enhanced index table: each row holds super-entries (one per miss address),
// each super-entry holds the misses that followed it.
class EnhancedIndexTable {
 public:
  EnhancedIndexTable(std::size_t rows, std::size_t super_entries, std::size_t entries);
  std::optional<SuperEntry> lookup(BlockAddress tag);
  void update(BlockAddress prev, BlockAddress next, std::uint64_t next_pos);
  std::size_t row_of(BlockAddress tag) const;

 private:
  std::size_t rows_;
  std::size_t supers_;
  std::size_t entries_;
  std::vector<SuperEntry> table_;
  std::uint64_t clock_ = 0;
};

struct DominoParams {
  std::size_t rows = std::size_t{1} << 14;
  std::size_t super_entries = 4;
  std::size_t entries = 4;
  std::size_t history_entries = std::size_t{1} << 16;
  std::size_t degree = 4;
  Seq metadata_latency = 0;
  std::uint64_t block_bytes = 64;
};

class DominoPrefetcher final : public Prefetcher {
 public:
  enum class State { kIdle, kHolding, kStreaming };

  explicit DominoPrefetcher(DominoParams params);
  std::string_view name() const override { return "domino"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  MetadataTraffic metadata() const override { return traffic_; }
  std::map<std::string, std::uint64_t> stats() const override;

  State state() const { return state_; }
  void log_stream_starts() { log_starts_ = true; }
  const std::vector<StreamStart>& stream_starts() const { return starts_; }

 private:
  std::vector<PrefetchRequest> stream_from(std::uint64_t pos, std::size_t count, Seq delay, Seq seq);

  DominoParams params_;
  EnhancedIndexTable eit_;
  HistoryTable ht_;
  State state_ = State::kIdle;
  SuperEntry held_;
  std::uint64_t stream_pos_ = 0;
  std::unordered_set<BlockAddress> outstanding_;
  std::optional<BlockAddress> prev_;
  MetadataTraffic traffic_;
  std::uint64_t appended_ = 0;
  std::uint64_t two_miss_matches_ = 0;
  bool log_starts_ = false;
  std::vector<StreamStart> starts_;
};

// ---------------------------------------------------------------------------
// ISB
// ---------------------------------------------------------------------------

// Physical <-> structural address maps kept mutually inverse. Each mapped
// block carries a small confidence counter: confirmations raise it, and a
// conflicting successor pair must drain it before the block is moved.
class StructuralMaps {
 public:
  static constexpr std::uint8_t kMaxConfidence = 3;

  explicit StructuralMaps(std::uint64_t chunk);

  std::optional<std::uint64_t> structural(BlockAddress block) const;
  std::optional<BlockAddress> physical(std::uint64_t s) const;
  // Trains on consecutive same-pc misses x then y.
  void train(BlockAddress x, BlockAddress y);
  std::vector<BlockAddress> predict(BlockAddress block, std::size_t degree) const;

  bool consistent() const;
  std::size_t size() const { return psam_.size(); }
  std::uint64_t chunks_allocated() const { return chunks_allocated_; }
  std::uint64_t chunk() const { return chunk_; }

 private:
  std::uint64_t fresh_chunk();
  void map(BlockAddress block, std::uint64_t s);
  void unmap(BlockAddress block);

  std::uint64_t chunk_;
  std::uint64_t next_chunk_ = 0;
  std::uint64_t chunks_allocated_ = 0;
  std::unordered_map<BlockAddress, std::uint64_t> psam_;
  std::unordered_map<std::uint64_t, BlockAddress> spam_;
  std::unordered_map<std::uint64_t, std::uint32_t> chunk_use_;
  std::unordered_map<BlockAddress, std::uint8_t> confidence_;
};

struct IsbParams {
  std::uint64_t chunk = 16;
  std::size_t onchip_pages = 1024;
  std::uint64_t blocks_per_page = 64;
  std::size_t degree = 4;
  std::uint64_t block_bytes = 64;
};

class IsbPrefetcher final : public Prefetcher {
 public:
  explicit IsbPrefetcher(IsbParams params);
  std::string_view name() const override { return "isb"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  MetadataTraffic metadata() const override { return traffic_; }
  std::map<std::string, std::uint64_t> stats() const override;

  const StructuralMaps& maps() const { return maps_; }

 private:
  void touch_page(BlockAddress block);

  IsbParams params_;
  StructuralMaps maps_;
  std::unordered_map<Addr, BlockAddress> last_miss_;
  // On-chip page metadata, LRU order (front = most recent).
  std::list<std::uint64_t> pages_;
  std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> page_pos_;
  MetadataTraffic traffic_;
};

}  // namespace prefetchlab
