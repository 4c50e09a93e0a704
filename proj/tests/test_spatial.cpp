#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "prefetchlab/spatial.hpp"
#include "prefetchlab/workload.hpp"
#include "reference.hpp"

using namespace prefetchlab;
using namespace prefetchlab::testing;

namespace {

const AccessOutcome kMiss = outcome(AccessClass::kDemandMiss);

std::vector<BlockAddress> blocks_of(const std::vector<PrefetchRequest>& reqs) {
  std::vector<BlockAddress> out;
  for (const auto& r : reqs) out.push_back(r.block);
  return out;
}

CacheConfig direct_mapped() {
  CacheConfig c;
  c.sets = 32;
  c.ways = 1;
  return c;
}

}  // namespace

TEST_CASE("footprint requests are ordered by distance from the trigger") {
  Geometry g;
  const auto r = footprint_requests(g, 3, 4, 0b1'0101'1010, "t", 0);
  CHECK(blocks_of(r) == std::vector<BlockAddress>{99, 102, 97, 104});
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i].rank == i + 1);
}

TEST_CASE("sms observe and predict examples") {
  const Geometry g;
  SmsPrefetcher sms(g, {});
  const Addr pc = 0x400;
  CHECK(sms.on_trigger(ev(pc, 320, 0), kMiss).empty());  // PHT miss
  sms.observe(ev(pc + 4, 322, 1), kMiss);
  sms.observe(ev(pc + 8, 323, 2), kMiss);
  sms.on_eviction(322, false);
  REQUIRE(sms.pht().peek(PcOffset{pc, 0}));
  CHECK(*sms.pht().peek(PcOffset{pc, 0}) == 0b1101);

  CHECK(blocks_of(sms.on_trigger(ev(pc, 640, 3), kMiss)) == std::vector<BlockAddress>{642, 643});

  // A region touched once stores only its trigger bit.
  sms.on_trigger(ev(pc, 32 * 50 + 5, 4), kMiss);
  sms.on_eviction(32 * 50 + 5, false);
  CHECK(*sms.pht().peek(PcOffset{pc, 5}) == (1u << 5));
  CHECK(sms.on_trigger(ev(pc, 32 * 60 + 5, 5), kMiss).empty());
}

TEST_CASE("sms generations close on the idle timeout") {
  SmsPrefetcher sms(Geometry{}, SmsParams{2048, 8, 100});
  sms.on_trigger(ev(1, 320, 0), kMiss);
  sms.observe(ev(1, 321, 1), kMiss);
  CHECK(sms.generations().open_count() == 1);
  sms.on_trigger(ev(1, 9999, 200), kMiss);
  CHECK(sms.pht().peek(PcOffset{1, 0}));
}

TEST_CASE("sms covers every non-trigger access after the first page") {
  SpatialSpec spec;
  spec.offsets = {0, 2, 3};
  spec.pages = 10;
  const Trace t = gen_spatial(spec);
  Engine e(direct_mapped(), std::make_unique<SmsPrefetcher>(Geometry{}, SmsParams{}), EngineOptions{32, 0, {}});
  const auto k = run_all(e, t);
  CHECK(k.prefetch_hits == 2 * 9);
  CHECK(k.late_prefetch_hits == 0);
  CHECK(k.demand_misses == 10 + 2);
}

TEST_CASE("sms and bingo footprints stay inside the region") {
  Geometry g;
  g.blocks_per_region = 8;
  const Trace t = random_spatial_trace(4, 20000, g);
  for (int which = 0; which < 2; ++which) {
    std::unique_ptr<Prefetcher> p;
    if (which == 0) p = std::make_unique<SmsPrefetcher>(g, SmsParams{});
    else p = std::make_unique<BingoPrefetcher>(g, BingoParams{});
    CacheConfig c;
    c.sets = 8;
    c.ways = 2;
    Engine e(c, std::move(p), EngineOptions{64, 4, {}});
    e.enable_issue_log();
    std::size_t checked = 0;
    for (const auto& ev : t) {
      e.dispatch(ev);
      for (; checked < e.issue_log().size(); ++checked) {
        const auto& rec = e.issue_log()[checked];
        const auto& trig = t.at(rec.trigger_seq);  // seq equals the trace index here
        CHECK(g.region(rec.block).region_id == g.region(g.block(trig.addr)).region_id);
      }
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("bingo table examples") {
  const Geometry g;
  BingoHistoryTable t(g, 1024, 16);
  const Addr pc = 0x500;
  const BlockAddress a = 32 * 7 + 3, b = 32 * 9 + 3, c = 32 * 11 + 3;
  t.insert(pc, a, 0b1001);
  t.insert(pc, b, 0b11000);
  CHECK(t.occupancy(t.set_of(pc, 3)) == 2);
  BingoMatch m{};
  CHECK(t.lookup(pc, a, &m) == std::uint64_t{0b1001});
  CHECK(m == BingoMatch::kLong);
  CHECK(t.lookup(pc, b, &m) == std::uint64_t{0b11000});
  CHECK(m == BingoMatch::kLong);

  t.insert(pc, a, 0b1111);
  CHECK(t.occupancy(t.set_of(pc, 3)) == 2);
  CHECK(t.lookup(pc, a) == std::uint64_t{0b1111});

  // Unknown trigger address: the latest footprint stored for (pc, offset 3).
  CHECK(t.lookup(pc, c, &m) == std::uint64_t{0b1111});
  CHECK(m == BingoMatch::kShort);

  CHECK_FALSE(t.lookup(pc, 32 * 7 + 4, &m));
  CHECK(m == BingoMatch::kNone);
  CHECK_FALSE(t.lookup(pc + 4, a, &m));
  CHECK(m == BingoMatch::kNone);
}

TEST_CASE("bingo set overflow replaces the least recently used entry") {
  const Geometry g;
  BingoHistoryTable t(g, 1, 2);
  t.insert(1, 32 * 1, 0b11);
  t.insert(1, 32 * 2, 0b101);
  t.lookup(1, 32 * 1);
  t.insert(1, 32 * 3, 0b1001);
  CHECK(t.evictions() == 1);
  BingoMatch m{};
  t.lookup(1, 32 * 2, &m);
  CHECK(m == BingoMatch::kShort);
  CHECK(t.lookup(1, 32 * 1, &m) == std::uint64_t{0b11});
  CHECK(m == BingoMatch::kLong);
}

TEST_CASE("bingo long miss with a short hit uses that footprint") {
  const Geometry g;
  BingoPrefetcher bingo(g, BingoParams{});
  const Addr pc = 0x600;
  bingo.on_trigger(ev(pc, 32 * 4 + 1, 0), kMiss);
  bingo.observe(ev(pc, 32 * 4 + 5, 1), kMiss);
  bingo.on_eviction(32 * 4 + 5, false);
  const auto r = bingo.on_trigger(ev(pc, 32 * 8 + 1, 2), kMiss);
  CHECK(blocks_of(r) == std::vector<BlockAddress>{32 * 8 + 5});
  CHECK(bingo.stats().at("bingo.short_matches") == 1);
  CHECK(bingo.on_trigger(ev(pc + 4, 32 * 12 + 1, 3), kMiss).empty());
}

TEST_CASE("bingo matches the two-table reference on random traces") {
  const Geometry g;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Trace t = random_spatial_trace(seed, 6000, g);
    CacheConfig c;
    c.sets = 8;
    c.ways = 2;
    auto bingo = std::make_unique<BingoPrefetcher>(g, BingoParams{1024, 16, 512});
    const auto* bp = bingo.get();
    Engine a(c, std::move(bingo), EngineOptions{16, 8, {}});
    Engine b(c, std::make_unique<NaiveBingo>(g, 512), EngineOptions{16, 8, {}});
    a.enable_issue_log();
    b.enable_issue_log();
    run_all(a, t);
    run_all(b, t);
    REQUIRE(bp->table().evictions() == 0);
    CHECK(a.issue_log() == b.issue_log());
    CHECK(a.counters().issued > 0);
  }
}

TEST_CASE("vldp longest match examples") {
  std::vector<DeltaPredictionTable> t;
  for (std::size_t o = 1; o <= 3; ++o) t.emplace_back(o, 64);
  const std::array<Delta, 3> h{5, 7, 0};
  t[0].update(h, 1);
  t[1].update(h, 2);
  LongestMatchStats s;
  CHECK(vldp_longest_match(t, h, 2, &s) == Delta{2});
  CHECK(s.multi_hits == 1);
  CHECK(s.conflicting_hits == 1);
  CHECK(s.violations == 0);
  CHECK(vldp_longest_match(t, h, 1, &s) == Delta{1});
  const std::array<Delta, 3> other{6, 7, 0};
  CHECK_FALSE(vldp_longest_match(t, other, 3, &s));
}

TEST_CASE("vldp tables are tagged by their full key") {
  DeltaPredictionTable t(2, 1);  // every key shares one slot
  const std::array<Delta, 3> a{1, 2, 0}, b{2, 1, 0};
  t.update(a, 3);
  CHECK(t.lookup(a) == Delta{3});
  CHECK_FALSE(t.lookup(b));
  t.update(b, 4);
  CHECK_FALSE(t.lookup(a));
}

TEST_CASE("vldp examples") {
  const Geometry g;
  VldpPrefetcher v(g, VldpParams{3, 64, 16, 2});
  CHECK(v.on_trigger(ev(1, 32 * 100 + 4, 0), kMiss).empty());

  Seq s = 1;
  std::uint32_t off = 0;
  for (int i = 0; i < 10; ++i) {
    v.on_trigger(ev(1, 32 * 200 + off, s++), kMiss);
    off += (i % 2 == 0) ? 1 : 2;
  }
  CHECK(v.opt(0) == Delta{1});
  // New region: offset 0 then 1 gives current delta 1; the chain is +2, then +1.
  CHECK(blocks_of(v.on_trigger(ev(1, 32 * 300, s++), kMiss)) == std::vector<BlockAddress>{32 * 300 + 1});
  CHECK(blocks_of(v.on_trigger(ev(1, 32 * 300 + 1, s++), kMiss)) ==
        std::vector<BlockAddress>{32 * 300 + 3, 32 * 300 + 4});
  CHECK(v.match_stats().violations == 0);
}

TEST_CASE("vldp never prefers a shorter history") {
  const Geometry g;
  std::uint64_t multi = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Trace t = random_spatial_trace(seed, 20000, g);
    CacheConfig c;
    c.sets = 16;
    c.ways = 2;
    auto p = std::make_unique<VldpPrefetcher>(g, VldpParams{});
    const auto* vp = p.get();
    Engine e(c, std::move(p), EngineOptions{4, 8, {}});
    run_all(e, t);
    CHECK(vp->match_stats().violations == 0);
    CHECK(vp->stats().at("vldp.longest_match_violations") == 0);
    multi += vp->match_stats().multi_hits;
  }
  CHECK(multi > 0);
}
