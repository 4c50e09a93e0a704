#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "prefetchlab/assoc_table.hpp"
#include "prefetchlab/prefetcher.hpp"

namespace prefetchlab {

// ---------------------------------------------------------------------------
// Instruction-based stride prefetching (Reference Prediction Table)
// ---------------------------------------------------------------------------

struct RptEntry {
  BlockAddress last_block = 0;
  Delta last_stride = 0;  // 0 = no stride observed yet
};

using ReferencePredictionTable = AssocTable<Addr, RptEntry>;

// Runs one RPT step for `block` accessed by `pc` and returns the predicted
// blocks. Predictions are made only when the current stride repeats the
// recorded one; the entry is updated either way.
std::vector<BlockAddress> ibsp_trigger(Addr pc, BlockAddress block, ReferencePredictionTable& rpt,
                                       std::size_t lookahead);

struct IbspParams {
  std::size_t entries = 256;
  std::size_t ways = 4;
  std::size_t lookahead = 4;
};

class IbspPrefetcher final : public Prefetcher {
 public:
  IbspPrefetcher(Geometry geometry, IbspParams params);
  std::string_view name() const override { return "ibsp"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  const ReferencePredictionTable& rpt() const { return rpt_; }

 private:
  Geometry geometry_;
  IbspParams params_;
  ReferencePredictionTable rpt_;
};

// ---------------------------------------------------------------------------
// Offset prefetching: sandbox (SP), best-offset (BOP) and multi-lookahead (MLOP)
// ---------------------------------------------------------------------------

// Nonzero candidate offsets in [lo, hi].
std::vector<Delta> offset_candidates(std::int64_t lo, std::int64_t hi);

// Tie rule shared by every offset selector: smaller magnitude wins, then the
// positive offset.
bool offset_preferred(Delta a, Delta b);

// Offsets whose accuracy over `window` reaches `threshold`, where the accuracy
// of o is the fraction of accesses x for which x - o was accessed earlier in
// the window. Returned in candidate order.
std::vector<Delta> sp_evaluate(std::span<const BlockAddress> window, std::span<const Delta> offsets,
                               double threshold);

struct TimedAccess {
  BlockAddress block = 0;
  Seq seq = 0;
};

// Best offset when only timely coverage counts: x is covered by o when x - o
// was accessed at least `timely_distance` events before x.
std::optional<Delta> bop_select(std::span<const TimedAccess> window, std::span<const Delta> offsets,
                                Seq timely_distance);

// score[o][X] counts accesses that offset o could have prefetched at least X
// accesses ahead of their occurrence.
class OffsetScoreMatrix {
 public:
  OffsetScoreMatrix(std::vector<Delta> offsets, std::size_t levels);

  std::size_t levels() const { return levels_; }
  const std::vector<Delta>& offsets() const { return offsets_; }
  std::uint64_t score(std::size_t offset_index, std::size_t level) const;
  // Adds one to levels 1..up_to (clamped to the matrix depth).
  void credit(std::size_t offset_index, std::uint64_t up_to);
  void reset();

 private:
  std::vector<Delta> offsets_;
  std::size_t levels_;
  std::vector<std::uint64_t> scores_;
};

struct AmtRow {
  std::uint64_t bits = 0;
  // Window access index at which each block was first touched.
  std::array<std::uint64_t, Geometry::kMaxRegionBlocks> stamp{};
};

using AccessMapTable = AssocTable<std::uint64_t, AmtRow, MixHash>;

// Scores one access. `access_index` is the access's position in the current
// evaluation window. Blocks that fell out of the AMT are not credited.
void mlop_update(BlockAddress block, std::uint64_t access_index, const Geometry& geometry,
                 AccessMapTable& amt, OffsetScoreMatrix& scores);

struct LevelOffset {
  std::uint32_t level = 0;
  Delta offset = 0;
  friend bool operator==(const LevelOffset&, const LevelOffset&) = default;
};

// Best offset per lookahead level, ascending level; levels where every score
// is zero are skipped.
std::vector<LevelOffset> mlop_select(const OffsetScoreMatrix& scores);

struct OffsetParams {
  std::int64_t min_offset = -8;
  std::int64_t max_offset = 8;
  std::size_t window = 1024;
  double sp_threshold = 0.25;
  std::size_t mlop_levels = 16;
  std::size_t amt_rows = 64;
  // Timeliness distance for BOP, in events.
  Seq timely_distance = 32;
};

class SandboxPrefetcher final : public Prefetcher {
 public:
  SandboxPrefetcher(Geometry geometry, OffsetParams params);
  std::string_view name() const override { return "sp"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  const std::vector<Delta>& accepted() const { return accepted_; }

 private:
  Geometry geometry_;
  OffsetParams params_;
  std::vector<Delta> offsets_;
  std::vector<BlockAddress> window_;
  std::vector<Delta> accepted_;
};

class BestOffsetPrefetcher final : public Prefetcher {
 public:
  BestOffsetPrefetcher(Geometry geometry, OffsetParams params);
  std::string_view name() const override { return "bop"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  std::optional<Delta> best() const { return best_; }

 private:
  Geometry geometry_;
  OffsetParams params_;
  std::vector<Delta> offsets_;
  std::vector<TimedAccess> window_;
  std::optional<Delta> best_;
};

// Trains a fresh score matrix over each window while prefetching with the
// selection frozen at the end of the previous window.
class MlopPrefetcher final : public Prefetcher {
 public:
  MlopPrefetcher(Geometry geometry, OffsetParams params);
  std::string_view name() const override { return "mlop"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  const std::vector<LevelOffset>& selection() const { return selection_; }
  const OffsetScoreMatrix& training_scores() const { return scores_; }

 private:
  Geometry geometry_;
  OffsetParams params_;
  AccessMapTable amt_;
  OffsetScoreMatrix scores_;
  std::uint64_t window_index_ = 0;
  std::vector<LevelOffset> selection_;
};

}  // namespace prefetchlab
