#include "prefetchlab/cache.hpp"

#include <algorithm>
#include <string>

namespace prefetchlab {

void SimClock::start(BlockAddress block, Seq issue_seq) {
  InFlight f{block, issue_seq, issue_seq + latency_};
  pending_[block] = f;
  order_.push_back(f);
}

std::optional<InFlight> SimClock::cancel(BlockAddress block) {
  auto it = pending_.find(block);
  if (it == pending_.end()) return std::nullopt;
  InFlight f = it->second;
  pending_.erase(it);
  return f;
}

std::vector<InFlight> SimClock::drain() {
  std::vector<InFlight> done;
  while (!order_.empty() && order_.front().completion_seq <= now_) {
    const InFlight f = order_.front();
    order_.pop_front();
    auto it = pending_.find(f.block);
    // Entries cancelled by a late demand hit (or re-issued later) are stale.
    if (it == pending_.end() || it->second.issue_seq != f.issue_seq) continue;
    pending_.erase(it);
    done.push_back(f);
  }
  return done;
}

void SimClock::clear() {
  pending_.clear();
  order_.clear();
}

void CacheConfig::validate() const {
  if (sets == 0 || ways == 0) throw ConfigError("cache.sets and cache.ways must be >= 1");
  if (!is_power_of_two(block_size)) throw ConfigError("cache.block_size must be a power of two");
  if (placement == Placement::kAuxBuffer && buffer_entries == 0) {
    throw ConfigError("cache.buffer_entries must be >= 1 with auxiliary placement");
  }
}

const char* to_string(AccessClass c) {
  switch (c) {
    case AccessClass::kDemandHit: return "demand-hit";
    case AccessClass::kDemandMiss: return "demand-miss";
    case AccessClass::kPrefetchHit: return "prefetch-hit";
    case AccessClass::kLatePrefetchHit: return "late-prefetch-hit";
  }
  return "?";
}

Cache::Cache(CacheConfig config) : config_(config) {
  config_.validate();
  lines_.resize(config_.sets * config_.ways);
}

Cache::Line* Cache::find_line(BlockAddress block) {
  const std::size_t base = set_index(block) * config_.ways;
  for (std::size_t w = 0; w < config_.ways; ++w) {
    Line& l = lines_[base + w];
    if (l.valid && l.block == block) return &l;
  }
  return nullptr;
}

const Cache::Line* Cache::find_line(BlockAddress block) const {
  return const_cast<Cache*>(this)->find_line(block);
}

Cache::Line& Cache::fill(BlockAddress block, bool prefetched, std::optional<Seq> issue_seq,
                         AccessOutcome* outcome) {
  const std::size_t base = set_index(block) * config_.ways;
  Line* victim = &lines_[base];
  for (std::size_t w = 0; w < config_.ways; ++w) {
    Line& cand = lines_[base + w];
    if (!cand.valid) {
      victim = &cand;
      break;
    }
    if (cand.stamp < victim->stamp) victim = &cand;
  }
  if (victim->valid) {
    evictions_.push_back({victim->block, victim->prefetched, victim->prefetch_issue_seq});
    if (outcome) {
      outcome->evicted = victim->block;
      outcome->evicted_was_prefetched_unused = victim->prefetched;
    }
  }
  *victim = Line{block, ++stamp_, issue_seq, prefetched, true};
  return *victim;
}

AccessOutcome Cache::access(BlockAddress block, SimClock& clock) {
  AccessOutcome out;
  if (Line* l = find_line(block)) {
    l->stamp = ++stamp_;
    if (l->prefetched) {
      out.cls = AccessClass::kPrefetchHit;
      out.prefetch_issue_seq = l->prefetch_issue_seq;
      l->prefetched = false;
    } else {
      out.cls = AccessClass::kDemandHit;
    }
    return out;
  }

  auto buf = std::find_if(buffer_.begin(), buffer_.end(),
                          [&](const Line& l) { return l.block == block; });
  if (buf != buffer_.end()) {
    out.cls = AccessClass::kPrefetchHit;
    out.prefetch_issue_seq = buf->prefetch_issue_seq;
    buffer_.erase(buf);
    fill(block, false, out.prefetch_issue_seq, &out);
    return out;
  }

  if (auto f = clock.cancel(block)) {
    out.cls = AccessClass::kLatePrefetchHit;
    out.prefetch_issue_seq = f->issue_seq;
    fill(block, false, f->issue_seq, &out);
    return out;
  }

  out.cls = AccessClass::kDemandMiss;
  fill(block, false, std::nullopt, &out);
  return out;
}

void Cache::insert_prefetch(BlockAddress block, SimClock& clock) {
  clock.start(block, clock.now());
}

std::size_t Cache::complete_fills(SimClock& clock) {
  const auto done = clock.drain();
  for (const auto& f : done) {
    if (config_.placement == Placement::kInCache) {
      fill(f.block, true, f.issue_seq, nullptr);
      continue;
    }
    if (buffer_.size() == config_.buffer_entries) {
      const Line& lru = buffer_.front();
      evictions_.push_back({lru.block, true, lru.prefetch_issue_seq});
      buffer_.pop_front();
    }
    buffer_.push_back(Line{f.block, ++stamp_, f.issue_seq, true, true});
  }
  return done.size();
}

std::vector<Eviction> Cache::drain_evictions() {
  std::vector<Eviction> out;
  out.swap(evictions_);
  return out;
}

void Cache::flush(SimClock& clock) {
  for (auto& l : lines_) {
    if (l.valid) evictions_.push_back({l.block, l.prefetched, l.prefetch_issue_seq});
    l = Line{};
  }
  for (const auto& l : buffer_) evictions_.push_back({l.block, true, l.prefetch_issue_seq});
  buffer_.clear();
  clock.clear();
}

bool Cache::resident(BlockAddress block) const { return find_line(block) || in_buffer(block); }

bool Cache::in_buffer(BlockAddress block) const {
  return std::any_of(buffer_.begin(), buffer_.end(),
                     [&](const Line& l) { return l.block == block; });
}

bool Cache::prefetched_unused(BlockAddress block) const {
  if (const Line* l = find_line(block)) return l->prefetched;
  return in_buffer(block);
}

std::size_t Cache::residency() const {
  std::size_t n = buffer_.size();
  for (const auto& l : lines_) n += l.valid ? 1 : 0;
  return n;
}

}  // namespace prefetchlab
