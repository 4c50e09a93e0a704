#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefetchlab/assoc_table.hpp"
#include "prefetchlab/prefetcher.hpp"

namespace prefetchlab {

// Events are block addresses (address backend) or signed deltas stored
// two's-complement (delta backend).
using RmdEvent = std::uint64_t;

// Maps an event to the event `distance` steps later.
class PairTable {
 public:
  PairTable(std::size_t entries, std::size_t ways) : table_(entries, ways) {}
  std::optional<RmdEvent> get(RmdEvent key) const;
  void set(RmdEvent key, RmdEvent value) { table_.insert(key, value); }
  std::size_t size() const { return table_.size(); }

 private:
  AssocTable<RmdEvent, RmdEvent, MixHash> table_;
};

// Incremental trainer: feed events in order and it records D1[y]=z, D2[x]=z
// for each consecutive triple x, y, z.
class RmdTrainer {
 public:
  void push(RmdEvent e, PairTable& d1, PairTable& d2);
  void reset() {
    prev1_.reset();
    prev2_.reset();
  }

 private:
  std::optional<RmdEvent> prev1_;
  std::optional<RmdEvent> prev2_;
};

void rmd_train(std::span<const RmdEvent> events, PairTable& d1, PairTable& d2);

enum class RmdStop { kAbsent, kMismatch, kCap };

// Emits D1 predictions while each one is confirmed by the D2 prediction made
// two steps earlier.
std::vector<RmdEvent> rmd_issue(RmdEvent trigger, const PairTable& d1, const PairTable& d2, std::size_t cap,
                                RmdStop* stop = nullptr);

// Chains D1 lookups `degree` times or until a lookup misses.
std::vector<RmdEvent> naive_multidegree(RmdEvent trigger, const PairTable& d1, std::size_t degree);

enum class RmdBackend { kAddress, kDelta };

RmdBackend parse_rmd_backend(const std::string& s);

struct RmdParams {
  RmdBackend backend = RmdBackend::kAddress;
  std::size_t cap = 8;
  std::size_t entries = 4096;
  std::size_t ways = 4;
  // Nonzero selects plain chaining with this fixed degree.
  std::size_t naive_degree = 0;
  std::size_t region_entries = 64;
};

class RmdPrefetcher final : public Prefetcher {
 public:
  RmdPrefetcher(Geometry geometry, RmdParams params);
  std::string_view name() const override { return "rmd"; }
  std::vector<PrefetchRequest> on_trigger(const AccessEvent& event, const AccessOutcome& outcome) override;
  std::map<std::string, std::uint64_t> stats() const override;

  const PairTable& d1() const { return d1_; }
  const PairTable& d2() const { return d2_; }

 private:
  struct RegionState {
    std::uint32_t last_offset = 0;
    RmdTrainer trainer;
  };

  std::vector<RmdEvent> predict(RmdEvent trigger);

  Geometry geometry_;
  RmdParams params_;
  PairTable d1_;
  PairTable d2_;
  RmdTrainer global_;
  AssocTable<std::uint64_t, RegionState, MixHash> regions_;
  std::uint64_t cap_hits_ = 0;
  std::uint64_t mismatch_stops_ = 0;
};

}  // namespace prefetchlab
