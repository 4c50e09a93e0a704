#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "prefetchlab/spatio_temporal.hpp"
#include "prefetchlab/temporal.hpp"
#include "prefetchlab/workload.hpp"
#include "support.hpp"

using namespace prefetchlab;
using namespace prefetchlab::testing;

namespace {

const Geometry kGeom;

// Block `off` of region `r`.
BlockAddress rb(std::uint64_t r, std::uint32_t off) { return kGeom.compose(r, off); }

void record(StemsPrefetcher& s, const std::vector<std::pair<Addr, BlockAddress>>& events, Seq first = 0) {
  Seq seq = first;
  for (const auto& [pc, b] : events) s.stems_record(ev(pc, b, seq++));
}

}  // namespace

TEST_CASE("rmob and pst recording examples") {
  StemsPrefetcher s(kGeom, {});
  // T1, s11, s12, T2
  record(s, {{1, rb(10, 0)}, {2, rb(10, 3)}, {3, rb(10, 5)}, {4, rb(20, 7)}});
  REQUIRE(s.rmob().head() == 2);
  CHECK(*s.rmob().read(0) == RmobRecord{1, rb(10, 0), 2});
  CHECK(*s.rmob().read(1) == RmobRecord{4, rb(20, 7), 0});
  s.close_all();
  const auto* p = s.pst().peek(PcOffset{1, 0});
  REQUIRE(p);
  CHECK(*p == std::vector<PstOffset>{{3, 0}, {5, 0}});
  const auto* q = s.pst().peek(PcOffset{4, 7});
  REQUIRE(q);
  CHECK(q->empty());
}

TEST_CASE("adjacent triggers record no spatial events") {
  StemsPrefetcher s(kGeom, {});
  record(s, {{1, rb(10, 0)}, {1, rb(11, 0)}});
  CHECK(s.rmob().read(0)->spatial_count == 0);
}

TEST_CASE("repeated offsets are recorded once") {
  StemsPrefetcher s(kGeom, {});
  record(s, {{1, rb(10, 0)}, {1, rb(10, 2)}, {1, rb(10, 2)}, {1, rb(10, 0)}});
  s.close_all();
  CHECK(*s.pst().peek(PcOffset{1, 0}) == std::vector<PstOffset>{{2, 0}});
  CHECK(s.rmob().read(0)->spatial_count == 1);
}

TEST_CASE("deltas count triggers since the region's previous event") {
  StemsPrefetcher s(kGeom, {});
  // T1, s11, T2, s12, s21
  record(s, {{1, rb(10, 0)}, {1, rb(10, 1)}, {2, rb(20, 4)}, {1, rb(10, 2)}, {2, rb(20, 5)}});
  s.close_all();
  CHECK(*s.pst().peek(PcOffset{1, 0}) == std::vector<PstOffset>{{1, 0}, {2, 1}});
  CHECK(*s.pst().peek(PcOffset{2, 4}) == std::vector<PstOffset>{{5, 0}});
}

TEST_CASE("reconstruction interleaves regions in recorded order") {
  {
    StemsPrefetcher s(kGeom, {});
    // T1, s11, s12, T2, s21
    record(s, {{1, rb(10, 0)}, {1, rb(10, 3)}, {1, rb(10, 5)}, {2, rb(20, 7)}, {2, rb(20, 8)}});
    s.close_all();
    CHECK(stems_reconstruct(s.rmob(), s.pst(), kGeom, 0, 10, 8) ==
          std::vector<BlockAddress>{rb(10, 3), rb(10, 5), rb(20, 7), rb(20, 8)});
    CHECK(s.preview(ev(1, rb(10, 0), 100), 3) == std::vector<BlockAddress>{rb(10, 3), rb(10, 5), rb(20, 7)});
    CHECK(s.preview(ev(1, rb(99, 0), 100), 3).empty());
  }
  {
    StemsPrefetcher s(kGeom, {});
    // T1, s11, T2, s12, s21
    record(s, {{1, rb(10, 0)}, {1, rb(10, 1)}, {2, rb(20, 4)}, {1, rb(10, 2)}, {2, rb(20, 5)}});
    s.close_all();
    CHECK(stems_reconstruct(s.rmob(), s.pst(), kGeom, 0, 10, 8) ==
          std::vector<BlockAddress>{rb(10, 1), rb(20, 4), rb(10, 2), rb(20, 5)});
  }
}

TEST_CASE("reconstruction replays regions still open before the match") {
  StemsPrefetcher s(kGeom, {});
  // T1, T2, s11, s21, T3, s12
  record(s, {{1, rb(10, 0)}, {2, rb(20, 0)}, {1, rb(10, 1)}, {2, rb(20, 1)}, {3, rb(30, 0)}, {1, rb(10, 2)}});
  s.close_all();
  // Matching T2 must still emit region 10's remaining offsets.
  CHECK(stems_reconstruct(s.rmob(), s.pst(), kGeom, 1, 10, 8) ==
        std::vector<BlockAddress>{rb(10, 1), rb(20, 1), rb(30, 0), rb(10, 2)});
  CHECK(stems_reconstruct(s.rmob(), s.pst(), kGeom, 1, 10, 0).front() == rb(20, 1));
}

TEST_CASE("a missing pst entry contributes only the trigger") {
  StemsPrefetcher s(kGeom, {});
  record(s, {{1, rb(10, 0)}, {1, rb(10, 1)}, {2, rb(20, 0)}, {2, rb(20, 3)}});
  CHECK(stems_reconstruct(s.rmob(), s.pst(), kGeom, 0, 10, 8) == std::vector<BlockAddress>{rb(20, 0)});
}

TEST_CASE("spatial-only history degenerates to footprint order") {
  StemsPrefetcher s(kGeom, {});
  record(s, {{1, rb(10, 4)}, {1, rb(10, 1)}, {1, rb(10, 9)}, {1, rb(10, 2)}});
  s.close_all();
  CHECK(stems_reconstruct(s.rmob(), s.pst(), kGeom, 0, 10, 8) ==
        std::vector<BlockAddress>{rb(10, 1), rb(10, 9), rb(10, 2)});
}

TEST_CASE("with empty patterns stems equals stms over triggers") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    StemsPrefetcher s(kGeom, {});
    HistoryTable ht(1 << 16);
    IndexTable it(1 << 15, 8);
    std::vector<BlockAddress> triggers;
    for (int i = 0; i < 300; ++i) triggers.push_back(rb(1000 + rng() % 120, static_cast<std::uint32_t>(rng() % 32)));
    Seq seq = 0;
    for (const auto b : triggers) {
      // Close first so that every access is a region trigger.
      s.close_all();
      s.stems_record(ev(7, b, seq++));
      stms_train(b, ht, it);
    }
    s.close_all();
    for (const auto b : triggers) {
      for (std::size_t n : {1u, 4u, 16u}) CHECK(s.preview(ev(7, b, seq), n) == stms_predict(b, ht, it, n));
    }
  }
}

TEST_CASE("stems prefetcher issues at most the degree and follows the reconstruction") {
  SpatioTemporalSpec spec;
  spec.regions = 100;
  const Trace t = gen_spatiotemporal(spec);
  StemsParams p;
  p.degree = 4;
  auto stems = std::make_unique<StemsPrefetcher>(kGeom, p);
  CacheConfig c;
  c.sets = 1024;
  c.ways = 8;
  Engine e(c, std::move(stems), EngineOptions{16, 4, {}});
  std::size_t flush = 0;
  while (!t[flush].is_flush()) ++flush;
  e.count_from(t[flush].seq);
  for (const auto& x : t) {
    const auto out = e.dispatch(x);
    CHECK(out.size() <= 4);
  }
  CHECK(coverage(e.counters()) > 0.8);
}

TEST_CASE("second-occurrence reconstruction fidelity") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SpatioTemporalSpec spec;
    spec.seed = seed;
    const Trace t = gen_spatiotemporal(spec);
    StemsPrefetcher s(kGeom, {});
    constexpr std::size_t kLook = 4;
    std::size_t triggers = 0, exact = 0;
    bool second = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i].is_flush()) {
        s.close_all();
        second = true;
        continue;
      }
      if (second && s.is_region_trigger(kGeom.block(t[i].addr))) {
        std::vector<BlockAddress> expect;
        for (std::size_t j = i + 1; j < t.size() && expect.size() < kLook; ++j) expect.push_back(kGeom.block(t[j].addr));
        auto got = s.preview(t[i], kLook);
        if (got.size() > expect.size()) got.resize(expect.size());
        ++triggers;
        exact += (got == expect);
      }
      s.stems_record(t[i]);
    }
    REQUIRE(triggers == spec.regions);
    CHECK(static_cast<double>(exact) / static_cast<double>(triggers) >= 0.95);
  }
}
