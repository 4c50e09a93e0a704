#pragma once

#include <memory>
#include <vector>

#include "prefetchlab/engine.hpp"
#include "prefetchlab/trace.hpp"

namespace prefetchlab::testing {

inline AccessEvent ev(Addr pc, BlockAddress block, Seq seq, std::uint64_t block_bytes = 64) {
  return AccessEvent{pc, block * block_bytes, seq, AccessKind::kLoad};
}

inline AccessOutcome outcome(AccessClass cls) {
  AccessOutcome o;
  o.cls = cls;
  return o;
}

// Returns a fixed candidate list on every trigger.
class ScriptedPrefetcher final : public Prefetcher {
 public:
  explicit ScriptedPrefetcher(std::vector<BlockAddress> blocks, Seq delay = 0)
      : blocks_(std::move(blocks)), delay_(delay) {}
  std::string_view name() const override { return "scripted"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent& e, const AccessOutcome&) override {
    ++triggers;
    std::vector<PrefetchRequest> out;
    std::uint32_t rank = 1;
    for (const auto b : blocks_) out.push_back({b, rank++, name(), e.seq, delay_});
    return out;
  }
  void observe(const AccessEvent&, const AccessOutcome&) override { ++observed; }
  void on_eviction(BlockAddress b, bool unused) override { evictions.emplace_back(b, unused); }

  std::vector<BlockAddress> blocks_;
  Seq delay_;
  int triggers = 0;
  int observed = 0;
  std::vector<std::pair<BlockAddress, bool>> evictions;
};

inline EngineCounters run_all(Engine& engine, const Trace& trace) {
  for (const auto& e : trace) engine.dispatch(e);
  return engine.counters();
}

inline double coverage(const EngineCounters& c) {
  const double covered = static_cast<double>(c.prefetch_hits + c.late_prefetch_hits);
  const double den = covered + static_cast<double>(c.demand_misses);
  return den == 0 ? 0.0 : covered / den;
}

}  // namespace prefetchlab::testing
