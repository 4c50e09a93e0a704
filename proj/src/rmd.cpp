#include "prefetchlab/rmd.hpp"

namespace prefetchlab {

std::optional<RmdEvent> PairTable::get(RmdEvent key) const {
  const RmdEvent* v = table_.peek(key);
  if (!v) return std::nullopt;
  return *v;
}

void RmdTrainer::push(RmdEvent e, PairTable& d1, PairTable& d2) {
  if (prev1_) d1.set(*prev1_, e);
  if (prev2_) d2.set(*prev2_, e);
  prev2_ = prev1_;
  prev1_ = e;
}

void rmd_train(std::span<const RmdEvent> events, PairTable& d1, PairTable& d2) {
  RmdTrainer t;
  for (const auto e : events) t.push(e, d1, d2);
}

std::vector<RmdEvent> rmd_issue(RmdEvent trigger, const PairTable& d1, const PairTable& d2, std::size_t cap,
                                RmdStop* stop) {
  std::vector<RmdEvent> out;
  if (stop) *stop = RmdStop::kCap;
  if (cap == 0) return out;
  const auto p1 = d1.get(trigger);
  if (!p1) {
    if (stop) *stop = RmdStop::kAbsent;
    return out;
  }
  out.push_back(*p1);
  RmdEvent before = trigger;  // p_{k-2}
  while (out.size() < cap) {
    const auto next = d1.get(out.back());
    if (!next) {
      if (stop) *stop = RmdStop::kAbsent;
      return out;
    }
    const auto confirm = d2.get(before);
    if (!confirm || *confirm != *next) {
      if (stop) *stop = RmdStop::kMismatch;
      return out;
    }
    before = out.back();
    out.push_back(*next);
  }
  return out;
}

std::vector<RmdEvent> naive_multidegree(RmdEvent trigger, const PairTable& d1, std::size_t degree) {
  std::vector<RmdEvent> out;
  RmdEvent cur = trigger;
  while (out.size() < degree) {
    const auto next = d1.get(cur);
    if (!next) break;
    out.push_back(*next);
    cur = *next;
  }
  return out;
}

RmdBackend parse_rmd_backend(const std::string& s) {
  if (s == "address") return RmdBackend::kAddress;
  if (s == "delta") return RmdBackend::kDelta;
  throw ConfigError("rmd.backend must be 'address' or 'delta', got '" + s + "'");
}

RmdPrefetcher::RmdPrefetcher(Geometry geometry, RmdParams params)
    : geometry_(geometry),
      params_(params),
      d1_(params.entries, params.ways),
      d2_(params.entries, params.ways),
      regions_(params.region_entries, params.region_entries) {}

std::vector<RmdEvent> RmdPrefetcher::predict(RmdEvent trigger) {
  if (params_.naive_degree > 0) return naive_multidegree(trigger, d1_, params_.naive_degree);
  RmdStop stop = RmdStop::kAbsent;
  auto out = rmd_issue(trigger, d1_, d2_, params_.cap, &stop);
  if (stop == RmdStop::kCap) ++cap_hits_;
  if (stop == RmdStop::kMismatch) ++mismatch_stops_;
  return out;
}

std::vector<PrefetchRequest> RmdPrefetcher::on_trigger(const AccessEvent& event, const AccessOutcome&) {
  const BlockAddress block = geometry_.block(event.addr);
  std::vector<PrefetchRequest> out;
  if (params_.backend == RmdBackend::kAddress) {
    global_.push(block, d1_, d2_);
    std::uint32_t rank = 1;
    for (const auto b : predict(block)) out.push_back({b, rank++, name(), event.seq, 0});
    return out;
  }

  const auto rc = geometry_.region(block);
  RegionState* st = regions_.find(rc.region_id);
  if (!st) {
    regions_.insert(rc.region_id, RegionState{rc.offset, {}});
    return out;
  }
  const Delta d = static_cast<Delta>(rc.offset) - static_cast<Delta>(st->last_offset);
  if (d == 0) return out;
  st->last_offset = rc.offset;
  st->trainer.push(static_cast<RmdEvent>(d), d1_, d2_);
  std::int64_t pos = rc.offset;
  std::uint32_t rank = 1;
  for (const auto e : predict(static_cast<RmdEvent>(d))) {
    pos += static_cast<Delta>(e);
    if (pos < 0 || pos >= static_cast<std::int64_t>(geometry_.blocks_per_region)) break;
    out.push_back({geometry_.compose(rc.region_id, static_cast<std::uint32_t>(pos)), rank++, name(),
                   event.seq, 0});
  }
  return out;
}

std::map<std::string, std::uint64_t> RmdPrefetcher::stats() const {
  return {{"rmd.cap_hits", cap_hits_}, {"rmd.mismatch_stops", mismatch_stops_}};
}

}  // namespace prefetchlab
