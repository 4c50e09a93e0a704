#include "prefetchlab/spatial.hpp"

#include <algorithm>
#include <cstdlib>

namespace prefetchlab {

GenerationTracker::GenerationTracker(Geometry geometry, Seq timeout)
    : geometry_(geometry), timeout_(timeout) {}

bool GenerationTracker::record(const AccessEvent& event) {
  const auto rc = geometry_.region(geometry_.block(event.addr));
  const auto bit = std::uint64_t{1} << rc.offset;
  if (auto it = open_.find(rc.region_id); it != open_.end()) {
    it->second.footprint |= bit;
    it->second.last_access = event.seq;
    return false;
  }
  open_.emplace(rc.region_id,
                Generation{rc.region_id, event.pc, geometry_.block(event.addr), rc.offset, bit, event.seq});
  return true;
}

std::optional<Generation> GenerationTracker::close_on_eviction(BlockAddress block) {
  const auto it = open_.find(geometry_.region(block).region_id);
  if (it == open_.end()) return std::nullopt;
  Generation g = it->second;
  open_.erase(it);
  return g;
}

std::vector<Generation> GenerationTracker::expire(Seq now) {
  std::vector<Generation> closed;
  if (timeout_ == 0) return closed;
  // Sweeping every quarter timeout keeps the cost linear in open regions.
  if (now < last_sweep_ + timeout_ / 4 && last_sweep_ != 0) return closed;
  last_sweep_ = now;
  for (auto it = open_.begin(); it != open_.end();) {
    if (now >= it->second.last_access + timeout_) {
      closed.push_back(it->second);
      it = open_.erase(it);
    } else {
      ++it;
    }
  }
  return closed;
}

const Generation* GenerationTracker::find(std::uint64_t region) const {
  const auto it = open_.find(region);
  return it == open_.end() ? nullptr : &it->second;
}

std::vector<PrefetchRequest> footprint_requests(const Geometry& geometry, std::uint64_t region,
                                                std::uint32_t trigger_offset, std::uint64_t footprint,
                                                std::string_view source, Seq trigger_seq) {
  std::vector<std::uint32_t> offsets;
  for (std::uint32_t o = 0; o < geometry.blocks_per_region; ++o) {
    if (o != trigger_offset && (footprint >> o & 1U)) offsets.push_back(o);
  }
  const auto dist = [&](std::uint32_t o) {
    return o > trigger_offset ? o - trigger_offset : trigger_offset - o;
  };
  std::stable_sort(offsets.begin(), offsets.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return dist(a) < dist(b); });
  std::vector<PrefetchRequest> out;
  out.reserve(offsets.size());
  std::uint32_t rank = 1;
  for (const auto o : offsets) {
    out.push_back({geometry.compose(region, o), rank++, source, trigger_seq, 0});
  }
  return out;
}

// ----- SMS -----

SmsPrefetcher::SmsPrefetcher(Geometry geometry, SmsParams params)
    : geometry_(geometry),
      generations_(geometry, params.generation_timeout),
      pht_(params.pht_entries, params.pht_ways) {}

void SmsPrefetcher::store(const Generation& g) {
  pht_.insert(PcOffset{g.trigger_pc, g.trigger_offset}, g.footprint);
}

bool SmsPrefetcher::sms_observe(const AccessEvent& event) {
  for (const auto& g : generations_.expire(event.seq)) store(g);
  return generations_.record(event);
}

std::vector<PrefetchRequest> SmsPrefetcher::sms_predict(const AccessEvent& event) {
  const auto rc = geometry_.region(geometry_.block(event.addr));
  const std::uint64_t* pattern = pht_.find(PcOffset{event.pc, rc.offset});
  if (!pattern) return {};
  return footprint_requests(geometry_, rc.region_id, rc.offset, *pattern, name(), event.seq);
}

std::vector<PrefetchRequest> SmsPrefetcher::on_trigger(const AccessEvent& event, const AccessOutcome&) {
  if (!sms_observe(event)) return {};
  return sms_predict(event);
}

void SmsPrefetcher::observe(const AccessEvent& event, const AccessOutcome&) { sms_observe(event); }

void SmsPrefetcher::on_eviction(BlockAddress block, bool) {
  if (const auto g = generations_.close_on_eviction(block)) store(*g);
}

// ----- Bingo -----

BingoHistoryTable::BingoHistoryTable(Geometry geometry, std::size_t sets, std::size_t ways)
    : geometry_(geometry), sets_(sets), ways_(ways) {
  if (sets == 0 || ways == 0) throw ConfigError("bingo.sets and bingo.ways must be >= 1");
  entries_.resize(sets * ways);
}

std::size_t BingoHistoryTable::set_of(Addr pc, std::uint32_t offset) const {
  const std::uint64_t key = (pc << 6) | offset;
  return static_cast<std::size_t>((key * 0x9e3779b97f4a7c15ULL) >> 32) % sets_;
}

void BingoHistoryTable::insert(Addr pc, BlockAddress trigger_block, std::uint64_t footprint) {
  const auto offset = geometry_.region(trigger_block).offset;
  Entry* base = &entries_[set_of(pc, offset) * ways_];
  Entry* victim = nullptr;
  for (std::size_t w = 0; w < ways_; ++w) {
    Entry& e = base[w];
    if (e.valid && e.pc == pc && e.block == trigger_block) {
      victim = &e;
      break;
    }
  }
  if (!victim) {
    victim = base;
    for (std::size_t w = 0; w < ways_; ++w) {
      Entry& e = base[w];
      if (!e.valid) {
        victim = &e;
        break;
      }
      if (e.used < victim->used) victim = &e;
    }
    if (victim->valid) ++evictions_;
  }
  ++clock_;
  *victim = Entry{pc, trigger_block, footprint, clock_, clock_, true};
}

std::optional<std::uint64_t> BingoHistoryTable::lookup(Addr pc, BlockAddress trigger_block,
                                                       BingoMatch* match) {
  const auto offset = geometry_.region(trigger_block).offset;
  Entry* base = &entries_[set_of(pc, offset) * ways_];
  if (match) *match = BingoMatch::kNone;
  for (std::size_t w = 0; w < ways_; ++w) {
    Entry& e = base[w];
    if (e.valid && e.pc == pc && e.block == trigger_block) {
      e.used = ++clock_;
      if (match) *match = BingoMatch::kLong;
      return e.footprint;
    }
  }
  Entry* best = nullptr;
  for (std::size_t w = 0; w < ways_; ++w) {
    Entry& e = base[w];
    if (!e.valid || e.pc != pc || geometry_.region(e.block).offset != offset) continue;
    if (!best || e.written > best->written) best = &e;
  }
  if (!best) return std::nullopt;
  best->used = ++clock_;
  if (match) *match = BingoMatch::kShort;
  return best->footprint;
}

std::size_t BingoHistoryTable::occupancy(std::size_t set) const {
  std::size_t n = 0;
  for (std::size_t w = 0; w < ways_; ++w) n += entries_[set * ways_ + w].valid ? 1 : 0;
  return n;
}

BingoPrefetcher::BingoPrefetcher(Geometry geometry, BingoParams params)
    : geometry_(geometry),
      generations_(geometry, params.generation_timeout),
      table_(geometry, params.sets, params.ways) {}

void BingoPrefetcher::expire(Seq now) {
  for (const auto& g : generations_.expire(now)) table_.insert(g.trigger_pc, g.trigger_block, g.footprint);
}

std::vector<PrefetchRequest> BingoPrefetcher::on_trigger(const AccessEvent& event, const AccessOutcome&) {
  expire(event.seq);
  if (!generations_.record(event)) return {};
  const BlockAddress block = geometry_.block(event.addr);
  BingoMatch match = BingoMatch::kNone;
  const auto footprint = table_.lookup(event.pc, block, &match);
  if (!footprint) return {};
  (match == BingoMatch::kLong ? long_matches_ : short_matches_)++;
  const auto rc = geometry_.region(block);
  return footprint_requests(geometry_, rc.region_id, rc.offset, *footprint, name(), event.seq);
}

void BingoPrefetcher::observe(const AccessEvent& event, const AccessOutcome&) {
  expire(event.seq);
  generations_.record(event);
}

void BingoPrefetcher::on_eviction(BlockAddress block, bool) {
  if (const auto g = generations_.close_on_eviction(block)) {
    table_.insert(g->trigger_pc, g->trigger_block, g->footprint);
  }
}

std::map<std::string, std::uint64_t> BingoPrefetcher::stats() const {
  return {{"bingo.long_matches", long_matches_},
          {"bingo.short_matches", short_matches_},
          {"bingo.table_evictions", table_.evictions()}};
}

// ----- VLDP -----

DeltaPredictionTable::DeltaPredictionTable(std::size_t order, std::size_t entries)
    : order_(order), slots_(entries) {
  if (order == 0 || order > kMaxDeltaOrder) throw ConfigError("vldp: DPT order must be 1..3");
  if (entries == 0) throw ConfigError("vldp.dpt_entries must be >= 1");
}

std::size_t DeltaPredictionTable::index(std::span<const Delta> history) const {
  std::uint64_t h = order_;
  for (std::size_t i = 0; i < order_; ++i) h = mix64(h ^ static_cast<std::uint64_t>(history[i]));
  return static_cast<std::size_t>(h % slots_.size());
}

std::optional<Delta> DeltaPredictionTable::lookup(std::span<const Delta> history) const {
  const Slot& s = slots_[index(history)];
  if (!s.valid || !std::equal(s.key.begin(), s.key.begin() + static_cast<std::ptrdiff_t>(order_),
                              history.begin())) {
    return std::nullopt;
  }
  return s.next;
}

void DeltaPredictionTable::update(std::span<const Delta> history, Delta next) {
  Slot& s = slots_[index(history)];
  s.key = {};
  std::copy_n(history.begin(), order_, s.key.begin());
  s.next = next;
  s.valid = true;
}

std::optional<Delta> vldp_longest_match(std::span<const DeltaPredictionTable> tables,
                                        std::span<const Delta> history, std::size_t available,
                                        LongestMatchStats* stats) {
  std::optional<Delta> chosen;
  std::size_t chosen_order = 0;
  std::size_t hits = 0;
  std::optional<Delta> first_hit;
  bool conflict = false;
  for (const auto& t : tables) {
    if (t.order() > available) continue;
    const auto p = t.lookup(history);
    if (!p) continue;
    ++hits;
    if (first_hit && *first_hit != *p) conflict = true;
    if (!first_hit) first_hit = p;
    if (t.order() > chosen_order) {
      chosen = p;
      chosen_order = t.order();
    }
  }
  if (stats) {
    ++stats->lookups;
    if (hits > 1) ++stats->multi_hits;
    if (conflict) ++stats->conflicting_hits;
    // Independent re-check of the selection: any hit of higher order than the
    // chosen one is a violation.
    for (const auto& t : tables) {
      if (t.order() > available || t.order() <= chosen_order) continue;
      if (t.lookup(history)) ++stats->violations;
    }
  }
  return chosen;
}

namespace {

DeltaHistory push_delta(const DeltaHistory& h, Delta d) {
  return {d, h[0], h[1]};
}

}  // namespace

VldpPrefetcher::VldpPrefetcher(Geometry geometry, VldpParams params)
    : geometry_(geometry),
      params_(params),
      dhb_(params.dhb_entries, params.dhb_entries),
      opt_(geometry.blocks_per_region) {
  if (params.dpt_orders == 0 || params.dpt_orders > kMaxDeltaOrder) {
    throw ConfigError("vldp.dpt_orders must be 1..3");
  }
  for (std::size_t i = 1; i <= params.dpt_orders; ++i) dpts_.emplace_back(i, params.dpt_entries);
}

std::vector<PrefetchRequest> VldpPrefetcher::on_trigger(const AccessEvent& event, const AccessOutcome&) {
  const BlockAddress block = geometry_.block(event.addr);
  const auto rc = geometry_.region(block);
  std::vector<PrefetchRequest> out;

  DhbRow* row = dhb_.find(rc.region_id);
  if (!row) {
    dhb_.insert(rc.region_id, DhbRow{rc.offset, {}, 0, rc.offset, 1});
    if (const auto d = opt_[rc.offset]) {
      const auto target = static_cast<std::int64_t>(rc.offset) + *d;
      if (target >= 0 && target < static_cast<std::int64_t>(geometry_.blocks_per_region)) {
        ++opt_predictions_;
        out.push_back({geometry_.compose(rc.region_id, static_cast<std::uint32_t>(target)), 1, name(),
                       event.seq, 0});
      }
    }
    return out;
  }

  const Delta delta = static_cast<Delta>(rc.offset) - static_cast<Delta>(row->last_offset);
  if (delta == 0) return out;

  const DeltaHistory observed = push_delta(row->deltas, delta);
  const std::size_t observed_count = std::min<std::size_t>(row->delta_count + 1, kMaxDeltaOrder);

  // Prediction, chaining each predicted delta back in as history.
  DeltaHistory h = observed;
  std::size_t h_count = observed_count;
  std::int64_t pos = rc.offset;
  for (std::uint32_t k = 1; k <= params_.degree; ++k) {
    const auto next = vldp_longest_match(dpts_, h, h_count, &match_stats_);
    if (!next || *next == 0) break;
    pos += *next;
    if (pos < 0 || pos >= static_cast<std::int64_t>(geometry_.blocks_per_region)) break;
    out.push_back({geometry_.compose(rc.region_id, static_cast<std::uint32_t>(pos)), k, name(), event.seq, 0});
    h = push_delta(h, *next);
    h_count = std::min<std::size_t>(h_count + 1, kMaxDeltaOrder);
  }

  // Training with the history that preceded this delta.
  for (auto& t : dpts_) {
    if (t.order() <= row->delta_count) t.update(row->deltas, delta);
  }
  if (row->num_accesses == 1) opt_[row->first_offset] = delta;

  row->deltas = observed;
  row->delta_count = static_cast<std::uint32_t>(observed_count);
  row->last_offset = rc.offset;
  ++row->num_accesses;
  return out;
}

std::map<std::string, std::uint64_t> VldpPrefetcher::stats() const {
  return {{"vldp.lookups", match_stats_.lookups},
          {"vldp.multi_hit_events", match_stats_.multi_hits},
          {"vldp.conflicting_hits", match_stats_.conflicting_hits},
          {"vldp.longest_match_violations", match_stats_.violations},
          {"vldp.opt_predictions", opt_predictions_}};
}

}  // namespace prefetchlab
