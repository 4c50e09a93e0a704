#include "prefetchlab/spatio_temporal.hpp"

#include <algorithm>

namespace prefetchlab {

Rmob::Rmob(std::size_t capacity) : slots_(capacity) {
  if (capacity == 0) throw ConfigError("stems.rmob_entries must be >= 1");
}

std::uint64_t Rmob::append(const RmobRecord& record) {
  const std::uint64_t pos = head_++;
  slots_[pos % slots_.size()] = Slot{record, pos, true};
  return pos;
}

std::optional<RmobRecord> Rmob::read(std::uint64_t pos) const {
  if (pos >= head_) return std::nullopt;
  const Slot& s = slots_[pos % slots_.size()];
  if (!s.valid || s.pos != pos) return std::nullopt;
  return s.record;
}

void Rmob::count_spatial() {
  if (head_ == 0) return;
  ++slots_[(head_ - 1) % slots_.size()].record.spatial_count;
}

Reconstruction::Reconstruction(const Rmob& rmob, const PatternSequenceTable& pst, const Geometry& geometry,
                               std::uint64_t matched_pos, std::size_t lookback)
    : rmob_(&rmob), pst_(&pst), geometry_(geometry) {
  // Replay the records just before the match so that regions still active at
  // the matched trigger contribute their remaining offsets.
  const std::uint64_t first = std::max<std::uint64_t>(
      rmob.oldest(), matched_pos >= lookback ? matched_pos - lookback : 0);
  for (std::uint64_t pos = first; pos < matched_pos; ++pos) {
    const auto rec = rmob.read(pos);
    if (!rec) continue;
    enter(*rec);
    while (budget_ > 0 && take_spatial()) {
    }
  }
  if (const auto rec = rmob.read(matched_pos)) enter(*rec);
  next_record_ = matched_pos + 1;
}

void Reconstruction::enter(const RmobRecord& record) {
  ++records_read_;
  for (auto& a : active_) ++a.counter;
  const auto rc = geometry_.region(record.trigger);
  Active a;
  a.region = rc.region_id;
  if (const auto* seq = pst_->peek(PcOffset{record.pc, rc.offset})) {
    a.pending.assign(seq->begin(), seq->end());
  }
  if (!a.pending.empty()) active_.push_back(std::move(a));
  budget_ = record.spatial_count;
}

std::optional<BlockAddress> Reconstruction::take_spatial() {
  for (auto it = active_.begin(); it != active_.end(); ++it) {
    if (it->pending.front().delta > it->counter) continue;
    const BlockAddress b = geometry_.compose(it->region, it->pending.front().offset);
    it->pending.pop_front();
    it->counter = 0;
    if (it->pending.empty()) active_.erase(it);
    --budget_;
    return b;
  }
  // Nothing ready: the rest of this interval cannot be reconstructed.
  budget_ = 0;
  return std::nullopt;
}

std::optional<BlockAddress> Reconstruction::next() {
  if (budget_ > 0) {
    if (const auto b = take_spatial()) return b;
  }
  const auto rec = rmob_->read(next_record_);
  if (!rec) return std::nullopt;
  ++next_record_;
  enter(*rec);
  return rec->trigger;
}

std::vector<BlockAddress> stems_reconstruct(const Rmob& rmob, const PatternSequenceTable& pst,
                                            const Geometry& geometry, std::uint64_t matched_pos,
                                            std::size_t count, std::size_t lookback) {
  Reconstruction r(rmob, pst, geometry, matched_pos, lookback);
  std::vector<BlockAddress> out;
  while (out.size() < count) {
    const auto b = r.next();
    if (!b) break;
    out.push_back(*b);
  }
  return out;
}

StemsPrefetcher::StemsPrefetcher(Geometry geometry, StemsParams params)
    : geometry_(geometry),
      params_(params),
      rmob_(params.rmob_entries),
      index_(params.index_entries, params.index_ways),
      pst_(params.pst_entries, params.pst_ways) {}

bool StemsPrefetcher::is_region_trigger(BlockAddress block) const {
  return !open_.contains(geometry_.region(block).region_id);
}

void StemsPrefetcher::close(std::map<std::uint64_t, OpenRegion>::iterator it) {
  pst_.insert(PcOffset{it->second.pc, it->second.trigger_offset}, std::move(it->second.sequence));
  ++traffic_.writes;
  open_.erase(it);
}

void StemsPrefetcher::close_all() {
  while (!open_.empty()) close(open_.begin());
}

void StemsPrefetcher::expire(Seq now) {
  const Seq timeout = params_.generation_timeout;
  if (timeout == 0 || (last_sweep_ != 0 && now < last_sweep_ + timeout / 4)) return;
  last_sweep_ = now;
  for (auto it = open_.begin(); it != open_.end();) {
    auto cur = it++;
    if (now >= cur->second.last_access + timeout) close(cur);
  }
}

void StemsPrefetcher::stems_record(const AccessEvent& event) {
  expire(event.seq);
  const BlockAddress block = geometry_.block(event.addr);
  const auto rc = geometry_.region(block);
  const std::uint64_t bit = std::uint64_t{1} << rc.offset;
  if (auto it = open_.find(rc.region_id); it != open_.end()) {
    OpenRegion& g = it->second;
    g.last_access = event.seq;
    if (g.footprint & bit) return;
    g.footprint |= bit;
    g.sequence.push_back({rc.offset, static_cast<std::uint32_t>(temporal_count_ - g.last_temporal)});
    g.last_temporal = temporal_count_;
    rmob_.count_spatial();
    return;
  }
  ++temporal_count_;
  open_.emplace(rc.region_id, OpenRegion{event.pc, rc.offset, bit, {}, temporal_count_, event.seq});
  const std::uint64_t pos = rmob_.append(RmobRecord{event.pc, block, 0});
  index_.insert(block, pos);
  ++traffic_.writes;  // index update
  if (pos % 8 == 0) ++traffic_.writes;  // one RMOB block per 8 records
}

std::vector<BlockAddress> StemsPrefetcher::preview(const AccessEvent& event, std::size_t count) const {
  const BlockAddress block = geometry_.block(event.addr);
  if (!is_region_trigger(block)) return {};
  const std::uint64_t* pos = index_.peek(block);
  if (!pos) return {};
  const auto rec = rmob_.read(*pos);
  if (!rec || rec->trigger != block) return {};
  return stems_reconstruct(rmob_, pst_, geometry_, *pos, count, params_.lookback);
}

std::vector<PrefetchRequest> StemsPrefetcher::on_trigger(const AccessEvent& event,
                                                         const AccessOutcome& outcome) {
  const BlockAddress block = geometry_.block(event.addr);
  std::vector<PrefetchRequest> out;
  if (outcome.cls != AccessClass::kDemandMiss) {
    if (recon_ && outstanding_.erase(block)) {
      if (const auto b = recon_->next()) {
        outstanding_.insert(*b);
        out.push_back({*b, 1, name(), event.seq, 0});
      }
    }
  } else if (is_region_trigger(block)) {
    const std::uint64_t* pos = index_.peek(block);
    const auto rec = pos ? rmob_.read(*pos) : std::nullopt;
    if (rec && rec->trigger == block) {
      ++reconstructions_;
      ++traffic_.stream_starts;
      traffic_.stream_start_reads += 2;
      traffic_.reads += 2;
      recon_.emplace(rmob_, pst_, geometry_, *pos, params_.lookback);
      outstanding_.clear();
      std::uint32_t rank = 1;
      for (std::size_t i = 0; i < params_.degree; ++i) {
        const auto b = recon_->next();
        if (!b) break;
        outstanding_.insert(*b);
        out.push_back({*b, rank++, name(), event.seq, 0});
      }
    }
  }
  stems_record(event);
  return out;
}

void StemsPrefetcher::observe(const AccessEvent& event, const AccessOutcome&) { stems_record(event); }

void StemsPrefetcher::on_eviction(BlockAddress block, bool) {
  const auto it = open_.find(geometry_.region(block).region_id);
  if (it != open_.end()) close(it);
}

std::map<std::string, std::uint64_t> StemsPrefetcher::stats() const {
  return {{"stems.reconstructions", reconstructions_}, {"stems.open_regions", open_.size()}};
}

}  // namespace prefetchlab
