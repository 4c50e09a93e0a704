#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "prefetchlab/rmd.hpp"
#include "support.hpp"

using namespace prefetchlab;
using namespace prefetchlab::testing;

namespace {

constexpr RmdEvent A = 1, B = 2, C = 3, D = 4, P = 5, X = 6;

PairTable table() { return PairTable(4096, 4); }

// Streams of fresh events where the last event of each stream reappears at
// position `at` (>= 1) of the following stream.
std::vector<std::vector<RmdEvent>> chained_streams(std::size_t count, std::size_t len, std::size_t at) {
  std::vector<std::vector<RmdEvent>> s;
  RmdEvent next = 1000;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<RmdEvent> cur;
    for (std::size_t j = 0; j < len; ++j) cur.push_back(next++);
    if (i > 0) cur[at] = s.back().back();
    s.push_back(cur);
  }
  return s;
}

// Events predicted for a trigger that are not in the rest of its stream.
std::size_t overpredicted(const std::vector<RmdEvent>& emitted, const std::vector<RmdEvent>& stream, std::size_t j) {
  const std::set<RmdEvent> rest(stream.begin() + static_cast<std::ptrdiff_t>(j + 1), stream.end());
  std::size_t n = 0;
  for (const auto e : emitted) n += rest.contains(e) ? 0 : 1;
  return n;
}

}  // namespace

TEST_CASE("training examples") {
  auto d1 = table(), d2 = table();
  const std::vector<RmdEvent> abc{A, B, C};
  rmd_train(abc, d1, d2);
  CHECK(d1.get(A) == B);
  CHECK(d1.get(B) == C);
  CHECK(d2.get(A) == C);
  CHECK_FALSE(d2.get(B));
  CHECK(d1.size() == 2);
  CHECK(d2.size() == 1);

  auto e1 = table(), e2 = table();
  const std::vector<RmdEvent> abcd{A, B, C, D};
  rmd_train(abcd, e1, e2);
  CHECK(e1.get(C) == D);
  CHECK(e2.get(B) == D);

  const std::vector<RmdEvent> abx{A, B, X};
  rmd_train(abx, e1, e2);
  CHECK(e1.get(B) == X);
  CHECK(e2.get(A) == X);
}

TEST_CASE("issue stops when the two distances disagree") {
  auto d1 = table(), d2 = table();
  d1.set(A, B);
  d1.set(B, C);
  d1.set(C, D);
  d2.set(A, C);
  d2.set(B, P);
  RmdStop stop{};
  CHECK(rmd_issue(A, d1, d2, 8, &stop) == std::vector<RmdEvent>{B, C});
  CHECK(stop == RmdStop::kMismatch);

  CHECK(rmd_issue(A, table(), d2, 8, &stop).empty());
  CHECK(stop == RmdStop::kAbsent);
  CHECK(rmd_issue(A, d1, d2, 0).empty());
  CHECK(rmd_issue(A, d1, d2, 1) == std::vector<RmdEvent>{B});
}

TEST_CASE("a periodic stream runs to the cap") {
  for (std::size_t period : {3u, 4u, 7u}) {
    std::vector<RmdEvent> s;
    for (std::size_t i = 0; i < 10 * period; ++i) s.push_back(100 + i % period);
    auto d1 = table(), d2 = table();
    rmd_train(s, d1, d2);
    RmdStop stop{};
    const auto out = rmd_issue(100, d1, d2, 8, &stop);
    CHECK(out.size() == 8);
    CHECK(stop == RmdStop::kCap);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 100 + (i + 1) % period);
  }
}

TEST_CASE("naive chaining examples") {
  auto d1 = table();
  d1.set(A, B);
  d1.set(B, C);
  CHECK(naive_multidegree(A, d1, 4) == std::vector<RmdEvent>{B, C});
  CHECK(naive_multidegree(A, d1, 0).empty());
  CHECK(naive_multidegree(A, d1, 1) == std::vector<RmdEvent>{B});
}

TEST_CASE("naive chaining overruns stream boundaries that rmd respects") {
  const auto streams = chained_streams(40, 8, 2);
  std::vector<RmdEvent> all;
  for (const auto& s : streams) all.insert(all.end(), s.begin(), s.end());
  auto d1 = table(), d2 = table();
  rmd_train(all, d1, d2);

  std::size_t rmd_over = 0, naive_over = 0;
  for (std::size_t i = 0; i + 1 < streams.size(); ++i) {
    for (std::size_t j = 0; j < streams[i].size(); ++j) {
      // Shared events occur twice in training, so their successor is ambiguous.
      if ((i > 0 && j == 2) || j + 1 == streams[i].size()) continue;
      const RmdEvent trig = streams[i][j];
      const auto r = rmd_issue(trig, d1, d2, 8);
      const auto n = naive_multidegree(trig, d1, 4);
      const auto prefix = naive_multidegree(trig, d1, 8);
      REQUIRE(r.size() <= prefix.size());
      CHECK(std::equal(r.begin(), r.end(), prefix.begin()));
      rmd_over += overpredicted(r, streams[i], j);
      naive_over += overpredicted(n, streams[i], j);
    }
  }
  CHECK(rmd_over == 0);
  CHECK(naive_over > 0);
}

TEST_CASE("rmd emissions are a prefix of naive chaining on random tables") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RmdEvent> s;
    const std::size_t alphabet = 3 + rng() % 20;
    for (int i = 0; i < 300; ++i) s.push_back(rng() % alphabet);
    auto d1 = table(), d2 = table();
    rmd_train(s, d1, d2);
    for (RmdEvent t = 0; t < alphabet; ++t) {
      const auto r = rmd_issue(t, d1, d2, 8);
      const auto n = naive_multidegree(t, d1, 8);
      REQUIRE(r.size() <= n.size());
      CHECK(std::equal(r.begin(), r.end(), n.begin()));
    }
  }
}

TEST_CASE("predictions commute with relabeling the events") {
  std::mt19937_64 rng(4);
  std::vector<RmdEvent> s;
  for (int i = 0; i < 200; ++i) s.push_back(rng() % 9);
  const auto relabel = [](RmdEvent e) { return static_cast<RmdEvent>(-static_cast<std::int64_t>(e) * 3 - 1); };
  std::vector<RmdEvent> m;
  for (const auto e : s) m.push_back(relabel(e));
  auto a1 = table(), a2 = table(), b1 = table(), b2 = table();
  rmd_train(s, a1, a2);
  rmd_train(m, b1, b2);
  for (RmdEvent t = 0; t < 9; ++t) {
    std::vector<RmdEvent> expect;
    for (const auto e : rmd_issue(t, a1, a2, 8)) expect.push_back(relabel(e));
    CHECK(rmd_issue(relabel(t), b1, b2, 8) == expect);
  }
}

TEST_CASE("delta backend learns a per-region pattern the address backend cannot") {
  const Geometry g;
  // Address backend: a periodic walk over absolute blocks.
  const std::vector<BlockAddress> walk{0, 3, 4, 9, 10, 15, 16, 21, 22, 27};
  RmdPrefetcher addr(g, RmdParams{});
  RmdParams dp;
  dp.backend = RmdBackend::kDelta;
  RmdPrefetcher delta(g, dp);
  const auto miss = outcome(AccessClass::kDemandMiss);
  Seq s = 0;
  std::vector<PrefetchRequest> last_addr, last_delta;
  for (int rep = 0; rep < 3; ++rep) {
    for (const auto b : walk) {
      last_addr = addr.on_trigger(ev(1, 1000 * 32 * rep + b, s), miss);
      last_delta = delta.on_trigger(ev(1, (500 + rep) * 32 + b, s), miss);
      ++s;
    }
  }
  // Delta stream 3,1,5,1,5,... repeats; the address stream never does.
  CHECK(last_addr.empty());
  CHECK_FALSE(last_delta.empty());
  CHECK(delta.stats().at("rmd.mismatch_stops") + delta.stats().at("rmd.cap_hits") > 0);
  CHECK_THROWS_AS(parse_rmd_backend("bogus"), ConfigError);
}

TEST_CASE("rmd prefetcher naive mode") {
  const Geometry g;
  RmdParams p;
  p.naive_degree = 3;
  RmdPrefetcher r(g, p);
  const auto miss = outcome(AccessClass::kDemandMiss);
  Seq s = 0;
  for (int rep = 0; rep < 2; ++rep) {
    for (BlockAddress b : {10, 20, 30, 40, 50}) r.on_trigger(ev(1, b, s++), miss);
  }
  const auto out = r.on_trigger(ev(1, 10, s++), miss);
  REQUIRE(out.size() == 3);
  CHECK(out[0].block == 20);
  CHECK(out[2].block == 40);
}
