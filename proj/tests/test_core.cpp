#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <random>

#include "prefetchlab/assoc_table.hpp"
#include "prefetchlab/core.hpp"
#include "prefetchlab/trace.hpp"

using namespace prefetchlab;

TEST_CASE("block_of examples") {
  CHECK(block_of(0x1040, 64) == 0x41);
  CHECK(block_of(0, 64) == 0);
  CHECK(block_of(0x107F, 64) == 0x41);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Addr a = rng();
    CHECK(block_of(a, 64) == a / 64);
    CHECK(block_of(a, 128) == a / 128);
  }
  CHECK_THROWS_AS(block_of(100, 48), ConfigError);
  CHECK_THROWS_AS(block_of(100, 0), ConfigError);
}

TEST_CASE("region_of examples and round trip") {
  CHECK(region_of(0x41, 32) == RegionCoordinates{2, 1});
  CHECK(region_of(0, 32) == RegionCoordinates{0, 0});
  CHECK(region_of(0, 8) == RegionCoordinates{0, 0});
  CHECK(region_of(31, 32) == RegionCoordinates{0, 31});
  CHECK_THROWS_AS(region_of(5, 24), ConfigError);

  Geometry g;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const BlockAddress b = rng() >> 8;
    const auto rc = g.region(b);
    CHECK(rc.offset < g.blocks_per_region);
    CHECK(g.compose(rc.region_id, rc.offset) == b);
  }
}

TEST_CASE("geometry validation") {
  Geometry g;
  CHECK_NOTHROW(g.validate());
  g.blocks_per_region = 128;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g.blocks_per_region = 64;
  CHECK_NOTHROW(g.validate());
  g.block_bytes = 96;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("parse_trace_record examples") {
  auto r = parse_trace_record("0x400812 0x7fff1040", 1);
  REQUIRE(r);
  CHECK(r->event.pc == 0x400812);
  CHECK(r->event.addr == 0x7fff1040);
  CHECK_FALSE(r->seq);

  r = parse_trace_record("0x0 0x0", 1);
  REQUIRE(r);
  CHECK(r->event.pc == 0);
  CHECK(r->event.addr == 0);

  try {
    parse_trace_record("garbage", 17);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 17);
  }
}

TEST_CASE("trace grammar extensions") {
  CHECK_FALSE(parse_trace_record("   # comment only", 1));
  CHECK_FALSE(parse_trace_record("", 1));
  const auto f = parse_trace_record("flush", 2);
  REQUIRE(f);
  CHECK(f->event.is_flush());
  const auto s = parse_trace_record("400812 7fff1040 99  # trailing", 3);
  REQUIRE(s);
  CHECK(s->event.pc == 0x400812);
  CHECK(s->seq == 99u);
  CHECK_THROWS_AS(parse_trace_record("0x1 0xzz", 4), ParseError);
  CHECK_THROWS_AS(parse_trace_record("0x1 0x2 3 4", 5), ParseError);
}

TEST_CASE("text traces number events and reject decreasing seq") {
  const Trace t = parse_text_trace("0x1 0x40\n# c\n0x1 0x80 10\nflush\n0x2 0xc0\n");
  REQUIRE(t.size() == 4);
  CHECK(t[0].seq == 0);
  CHECK(t[1].seq == 10);
  CHECK(t[2].is_flush());
  CHECK(t[2].seq == 11);
  CHECK(t[3].seq == 12);

  try {
    parse_text_trace("0x1 0x40 5\n0x1 0x80 5\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("binary and text encodings round trip") {
  Trace t;
  for (Seq i = 0; i < 50; ++i) t.push_back({0x400000 + i, i * 4096 + 64, i, AccessKind::kLoad});
  t.push_back({0, 0, 50, AccessKind::kFlush});
  t.push_back({0x1, 0x40, 51, AccessKind::kLoad});

  CHECK(parse_binary_trace(encode_binary_trace(t)) == t);
  CHECK(parse_text_trace(encode_text_trace(t)) == t);
  CHECK_THROWS_AS(parse_binary_trace(std::string(17, '\0')), ParseError);

  const auto dir = std::filesystem::temp_directory_path() / "prefetchlab_core_test";
  std::filesystem::create_directories(dir);
  write_trace(dir / "t.btrace", t);
  write_trace(dir / "t.txt", t);
  CHECK(read_trace(dir / "t.btrace") == t);
  CHECK(read_trace(dir / "t.txt") == t);
  CHECK_THROWS_AS(read_trace(dir / "missing.txt"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("AssocTable keeps true LRU per set") {
  AssocTable<std::uint64_t, int> t(4, 2);  // 2 sets x 2 ways, std::hash is identity here
  t.insert(0, 0);
  t.insert(2, 2);
  CHECK(t.find(0));  // 2 is now LRU in set 0
  const auto ev = t.insert(4, 4);
  REQUIRE(ev);
  CHECK(ev->first == 2);
  CHECK(t.contains(0));
  CHECK(t.contains(4));
  CHECK_FALSE(t.insert(4, 40));
  CHECK(*t.peek(4) == 40);
  CHECK(t.size() == 2);
  CHECK(t.erase(0));
  CHECK(t.size() == 1);
  CHECK_THROWS_AS((AssocTable<int, int>(5, 2)), ConfigError);
}
