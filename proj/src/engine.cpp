#include "prefetchlab/engine.hpp"

#include <algorithm>
#include <unordered_set>

namespace prefetchlab {

Engine::Engine(const CacheConfig& cache, std::unique_ptr<Prefetcher> prefetcher,
               EngineOptions options)
    : cache_(cache),
      clock_(options.memory_latency),
      prefetcher_(prefetcher ? std::move(prefetcher) : std::make_unique<NoPrefetcher>()),
      options_(options),
      degree_(options.degree) {}

void Engine::set_degree(std::size_t degree) { degree_ = degree; }

void Engine::resolve(bool useful) {
  if (!options_.adaptive.enabled) return;
  resolutions_.push_back(useful);
  if (resolutions_.size() > options_.adaptive.window) resolutions_.pop_front();
  if (++since_adjust_ < options_.adaptive.window) return;
  since_adjust_ = 0;
  const auto hits = std::count(resolutions_.begin(), resolutions_.end(), true);
  const double accuracy = static_cast<double>(hits) / static_cast<double>(resolutions_.size());
  if (accuracy < options_.adaptive.low) {
    degree_ = std::max<std::size_t>(1, degree_ / 2);
  } else if (accuracy > options_.adaptive.high) {
    degree_ = std::min(options_.degree, std::max<std::size_t>(1, degree_ * 2));
  }
}

void Engine::forward_evictions() {
  for (const auto& ev : cache_.drain_evictions()) {
    if (ev.prefetched_unused) {
      if (ev.prefetch_issue_seq && counting(*ev.prefetch_issue_seq)) ++counters_.evicted_unused;
      resolve(false);
    }
    prefetcher_->on_eviction(ev.block, ev.prefetched_unused);
  }
}

void Engine::account(const AccessOutcome& outcome, Seq seq) {
  const bool covered = outcome.cls == AccessClass::kPrefetchHit ||
                       outcome.cls == AccessClass::kLatePrefetchHit;
  if (covered) {
    if (outcome.prefetch_issue_seq && counting(*outcome.prefetch_issue_seq)) ++counters_.useful;
    resolve(true);
  }
  if (!counting(seq)) return;
  ++counters_.demand_accesses;
  switch (outcome.cls) {
    case AccessClass::kDemandHit: ++counters_.demand_hits; break;
    case AccessClass::kDemandMiss: ++counters_.demand_misses; break;
    case AccessClass::kPrefetchHit: ++counters_.prefetch_hits; break;
    case AccessClass::kLatePrefetchHit: ++counters_.late_prefetch_hits; break;
  }
}

void Engine::issue(const PrefetchRequest& req, std::vector<PrefetchRequest>& out) {
  cache_.insert_prefetch(req.block, clock_);
  if (counting(clock_.now())) ++counters_.issued;
  if (log_issues_) issue_log_.push_back({clock_.now(), req.trigger_seq, req.block, req.rank});
  out.push_back(req);
}

bool Engine::pending(BlockAddress block) const {
  return std::any_of(deferred_.begin(), deferred_.end(),
                     [&](const Deferred& d) { return d.request.block == block; });
}

void Engine::release_deferred(std::vector<PrefetchRequest>& out) {
  while (!deferred_.empty() && deferred_.front().ready <= clock_.now()) {
    const PrefetchRequest req = deferred_.front().request;
    deferred_.pop_front();
    if (cache_.resident(req.block) || clock_.in_flight(req.block)) continue;
    issue(req, out);
  }
}

void Engine::filter_and_issue(std::vector<PrefetchRequest> candidates, const AccessEvent& event,
                              BlockAddress demand_block, std::vector<PrefetchRequest>& out) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const PrefetchRequest& a, const PrefetchRequest& b) { return a.rank < b.rank; });
  std::unordered_set<BlockAddress> seen;
  std::size_t accepted = 0;
  for (auto& req : candidates) {
    if (req.block == demand_block || !seen.insert(req.block).second) continue;
    if (cache_.resident(req.block) || clock_.in_flight(req.block) || pending(req.block)) continue;
    if (accepted == degree_) {
      if (counting(event.seq)) ++counters_.degree_truncations;
      break;
    }
    ++accepted;
    req.trigger_seq = event.seq;
    if (req.delay == 0) {
      issue(req, out);
      continue;
    }
    const Seq ready = event.seq + req.delay;
    auto pos = std::upper_bound(deferred_.begin(), deferred_.end(), ready,
                                [](Seq r, const Deferred& d) { return r < d.ready; });
    deferred_.insert(pos, Deferred{ready, req});
  }
}

std::vector<PrefetchRequest> Engine::dispatch(const AccessEvent& event) {
  std::vector<PrefetchRequest> out;
  clock_.advance_to(event.seq);

  if (event.is_flush()) {
    cache_.flush(clock_);
    deferred_.clear();
    forward_evictions();
    return out;
  }

  cache_.complete_fills(clock_);
  forward_evictions();
  release_deferred(out);

  const BlockAddress block = block_of(event.addr, cache_.config().block_size);
  last_outcome_ = cache_.access(block, clock_);
  account(last_outcome_, event.seq);
  forward_evictions();

  if (!last_outcome_.is_trigger()) {
    prefetcher_->observe(event, last_outcome_);
    return out;
  }
  filter_and_issue(prefetcher_->on_trigger(event, last_outcome_), event, block, out);
  return out;
}

}  // namespace prefetchlab
