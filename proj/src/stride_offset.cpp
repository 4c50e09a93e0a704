#include "prefetchlab/stride_offset.hpp"

#include <algorithm>
#include <cstdlib>
#include <unordered_map>
#include <unordered_set>

namespace prefetchlab {
namespace {

// block + delta, or nullopt when the result would fall below address zero.
std::optional<BlockAddress> offset_block(BlockAddress block, Delta delta) {
  if (delta < 0 && static_cast<std::uint64_t>(-delta) > block) return std::nullopt;
  return block + static_cast<std::uint64_t>(delta);
}

}  // namespace

std::vector<BlockAddress> ibsp_trigger(Addr pc, BlockAddress block, ReferencePredictionTable& rpt,
                                       std::size_t lookahead) {
  RptEntry* entry = rpt.find(pc);
  if (!entry) {
    rpt.insert(pc, RptEntry{block, 0});
    return {};
  }
  const Delta stride = static_cast<Delta>(block - entry->last_block);
  std::vector<BlockAddress> out;
  if (entry->last_stride != 0 && stride == entry->last_stride) {
    for (std::size_t i = 1; i <= lookahead; ++i) {
      const auto b = offset_block(block, stride * static_cast<Delta>(i));
      if (!b) break;
      out.push_back(*b);
    }
  }
  entry->last_block = block;
  entry->last_stride = stride;
  return out;
}

IbspPrefetcher::IbspPrefetcher(Geometry geometry, IbspParams params)
    : geometry_(geometry), params_(params), rpt_(params.entries, params.ways) {}

std::vector<PrefetchRequest> IbspPrefetcher::on_trigger(const AccessEvent& event, const AccessOutcome&) {
  const auto blocks = ibsp_trigger(event.pc, geometry_.block(event.addr), rpt_, params_.lookahead);
  std::vector<PrefetchRequest> out;
  out.reserve(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    out.push_back({blocks[i], static_cast<std::uint32_t>(i + 1), name(), event.seq, 0});
  }
  return out;
}

std::vector<Delta> offset_candidates(std::int64_t lo, std::int64_t hi) {
  std::vector<Delta> out;
  for (std::int64_t o = lo; o <= hi; ++o) {
    if (o != 0) out.push_back(o);
  }
  return out;
}

bool offset_preferred(Delta a, Delta b) {
  const auto ma = std::llabs(a);
  const auto mb = std::llabs(b);
  if (ma != mb) return ma < mb;
  return a > b;
}

std::vector<Delta> sp_evaluate(std::span<const BlockAddress> window, std::span<const Delta> offsets,
                               double threshold) {
  if (window.empty()) return {};
  std::vector<std::uint64_t> hits(offsets.size(), 0);
  std::unordered_set<BlockAddress> seen;
  seen.reserve(window.size() * 2);
  for (const BlockAddress x : window) {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const auto src = offset_block(x, -offsets[k]);
      if (src && seen.contains(*src)) ++hits[k];
    }
    seen.insert(x);
  }
  std::vector<Delta> accepted;
  const double n = static_cast<double>(window.size());
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    if (static_cast<double>(hits[k]) / n >= threshold) accepted.push_back(offsets[k]);
  }
  return accepted;
}

std::optional<Delta> bop_select(std::span<const TimedAccess> window, std::span<const Delta> offsets,
                                Seq timely_distance) {
  std::vector<std::uint64_t> score(offsets.size(), 0);
  std::unordered_map<BlockAddress, Seq> first_seen;
  first_seen.reserve(window.size() * 2);
  for (const auto& acc : window) {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const auto src = offset_block(acc.block, -offsets[k]);
      if (!src) continue;
      const auto it = first_seen.find(*src);
      if (it != first_seen.end() && it->second + timely_distance <= acc.seq) ++score[k];
    }
    first_seen.try_emplace(acc.block, acc.seq);
  }
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    if (score[k] == 0) continue;
    if (!best || score[k] > score[*best] ||
        (score[k] == score[*best] && offset_preferred(offsets[k], offsets[*best]))) {
      best = k;
    }
  }
  if (!best) return std::nullopt;
  return offsets[*best];
}

OffsetScoreMatrix::OffsetScoreMatrix(std::vector<Delta> offsets, std::size_t levels)
    : offsets_(std::move(offsets)), levels_(levels), scores_(offsets_.size() * levels, 0) {
  if (levels == 0) throw ConfigError("mlop.levels must be >= 1");
}

std::uint64_t OffsetScoreMatrix::score(std::size_t offset_index, std::size_t level) const {
  return scores_[offset_index * levels_ + (level - 1)];
}

void OffsetScoreMatrix::credit(std::size_t offset_index, std::uint64_t up_to) {
  const std::size_t top = static_cast<std::size_t>(std::min<std::uint64_t>(up_to, levels_));
  for (std::size_t x = 0; x < top; ++x) ++scores_[offset_index * levels_ + x];
}

void OffsetScoreMatrix::reset() { std::fill(scores_.begin(), scores_.end(), 0); }

void mlop_update(BlockAddress block, std::uint64_t access_index, const Geometry& geometry,
                 AccessMapTable& amt, OffsetScoreMatrix& scores) {
  const auto& offsets = scores.offsets();
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const auto src = offset_block(block, -offsets[k]);
    if (!src) continue;
    const auto rc = geometry.region(*src);
    const AmtRow* row = amt.peek(rc.region_id);
    if (!row || !(row->bits >> rc.offset & 1U)) continue;
    scores.credit(k, access_index - row->stamp[rc.offset]);
  }
  const auto rc = geometry.region(block);
  AmtRow* row = amt.find(rc.region_id);
  if (!row) {
    amt.insert(rc.region_id, AmtRow{});
    row = amt.find(rc.region_id);
  }
  if (!(row->bits >> rc.offset & 1U)) {
    row->bits |= std::uint64_t{1} << rc.offset;
    row->stamp[rc.offset] = access_index;
  }
}

std::vector<LevelOffset> mlop_select(const OffsetScoreMatrix& scores) {
  std::vector<LevelOffset> out;
  const auto& offsets = scores.offsets();
  for (std::size_t level = 1; level <= scores.levels(); ++level) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const auto s = scores.score(k, level);
      if (s == 0) continue;
      if (!best || s > scores.score(*best, level) ||
          (s == scores.score(*best, level) && offset_preferred(offsets[k], offsets[*best]))) {
        best = k;
      }
    }
    if (best) out.push_back({static_cast<std::uint32_t>(level), offsets[*best]});
  }
  return out;
}

SandboxPrefetcher::SandboxPrefetcher(Geometry geometry, OffsetParams params)
    : geometry_(geometry),
      params_(params),
      offsets_(offset_candidates(params.min_offset, params.max_offset)) {
  if (params_.window == 0) throw ConfigError("offset.window must be >= 1");
  window_.reserve(params_.window);
}

std::vector<PrefetchRequest> SandboxPrefetcher::on_trigger(const AccessEvent& event, const AccessOutcome&) {
  const BlockAddress block = geometry_.block(event.addr);
  window_.push_back(block);
  if (window_.size() == params_.window) {
    accepted_ = sp_evaluate(window_, offsets_, params_.sp_threshold);
    std::stable_sort(accepted_.begin(), accepted_.end(), offset_preferred);
    window_.clear();
  }
  std::vector<PrefetchRequest> out;
  std::uint32_t rank = 1;
  for (const Delta o : accepted_) {
    if (const auto b = offset_block(block, o)) out.push_back({*b, rank++, name(), event.seq, 0});
  }
  return out;
}

BestOffsetPrefetcher::BestOffsetPrefetcher(Geometry geometry, OffsetParams params)
    : geometry_(geometry),
      params_(params),
      offsets_(offset_candidates(params.min_offset, params.max_offset)) {
  if (params_.window == 0) throw ConfigError("offset.window must be >= 1");
  window_.reserve(params_.window);
}

std::vector<PrefetchRequest> BestOffsetPrefetcher::on_trigger(const AccessEvent& event,
                                                              const AccessOutcome&) {
  const BlockAddress block = geometry_.block(event.addr);
  window_.push_back({block, event.seq});
  if (window_.size() == params_.window) {
    best_ = bop_select(window_, offsets_, params_.timely_distance);
    window_.clear();
  }
  if (!best_) return {};
  const auto b = offset_block(block, *best_);
  if (!b) return {};
  return {PrefetchRequest{*b, 1, name(), event.seq, 0}};
}

MlopPrefetcher::MlopPrefetcher(Geometry geometry, OffsetParams params)
    : geometry_(geometry),
      params_(params),
      amt_(params.amt_rows, params.amt_rows),
      scores_(offset_candidates(params.min_offset, params.max_offset), params.mlop_levels) {
  if (params_.window == 0) throw ConfigError("mlop.window must be >= 1");
}

std::vector<PrefetchRequest> MlopPrefetcher::on_trigger(const AccessEvent& event, const AccessOutcome&) {
  const BlockAddress block = geometry_.block(event.addr);
  mlop_update(block, window_index_++, geometry_, amt_, scores_);
  if (window_index_ == params_.window) {
    selection_ = mlop_select(scores_);
    scores_.reset();
    amt_.clear();
    window_index_ = 0;
  }
  std::vector<PrefetchRequest> out;
  for (const auto& sel : selection_) {
    if (const auto b = offset_block(block, sel.offset)) out.push_back({*b, sel.level, name(), event.seq, 0});
  }
  return out;
}

}  // namespace prefetchlab
