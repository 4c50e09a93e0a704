#include "prefetchlab/workload.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <optional>
#include <functional>
#include <random>
#include <unordered_set>

namespace prefetchlab {
namespace {

AccessEvent load(Addr pc, BlockAddress block, const Geometry& g) {
  return AccessEvent{pc, block * g.block_bytes, 0, AccessKind::kLoad};
}

AccessEvent flush_event() { return AccessEvent{0, 0, 0, AccessKind::kFlush}; }

// `count` blocks in pairwise distinct regions drawn from a 2^20-region window
// starting at `base_region`, with no two consecutive equal strides.
std::vector<BlockAddress> scattered_blocks(std::size_t count, std::uint64_t base_region, std::mt19937_64& rng,
                                           const Geometry& g) {
  std::uniform_int_distribution<std::uint64_t> region(0, (1ULL << 20) - 1);
  std::uniform_int_distribution<std::uint64_t> offset(0, g.blocks_per_region - 1);
  std::unordered_set<std::uint64_t> used;
  std::vector<BlockAddress> out;
  out.reserve(count);
  while (out.size() < count) {
    const std::uint64_t r = base_region + region(rng);
    if (used.contains(r)) continue;
    const BlockAddress b = g.compose(r, static_cast<std::uint32_t>(offset(rng)));
    if (out.size() >= 2 && b - out.back() == out.back() - out[out.size() - 2]) continue;
    used.insert(r);
    out.push_back(b);
  }
  return out;
}

std::vector<std::uint32_t> random_footprint(std::size_t size, std::mt19937_64& rng, const Geometry& g) {
  if (size == 0 || size > g.blocks_per_region) {
    throw ConfigError("footprint size must be in 1..region.blocks");
  }
  std::vector<std::uint32_t> all(g.blocks_per_region);
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(size);
  return all;
}

}  // namespace

void renumber(Trace& trace) {
  for (std::size_t i = 0; i < trace.size(); ++i) trace[i].seq = i;
}

Trace gen_strided(const StridedSpec& spec, const Geometry& g) {
  if (spec.stride == 0) throw ConfigError("strided: stride must be nonzero");
  const std::int64_t last = static_cast<std::int64_t>(spec.base) +
                            spec.stride * static_cast<std::int64_t>(spec.n > 0 ? spec.n - 1 : 0);
  if (last < 0) throw ConfigError("strided: sequence would fall below address zero");
  Trace t;
  t.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const auto b = static_cast<BlockAddress>(static_cast<std::int64_t>(spec.base) +
                                             spec.stride * static_cast<std::int64_t>(i));
    t.push_back(load(spec.pc, b, g));
  }
  renumber(t);
  return t;
}

Trace gen_temporal(const TemporalSpec& spec, const Geometry& g) {
  if (spec.seq < 2 || spec.repeats < 1) throw ConfigError("temporal: seq >= 2 and repeats >= 1 required");
  std::mt19937_64 rng(spec.seed);
  const auto blocks = scattered_blocks(spec.seq, 1ULL << 22, rng, g);
  Trace t;
  for (std::size_t r = 0; r < spec.repeats; ++r) {
    if (r > 0 && spec.flush) t.push_back(flush_event());
    for (const auto b : blocks) t.push_back(load(spec.pc, b, g));
  }
  renumber(t);
  return t;
}

Trace gen_spatial(const SpatialSpec& spec, const Geometry& g) {
  if (spec.pages < 1) throw ConfigError("spatial: pages >= 1 required");
  std::mt19937_64 rng(spec.seed);
  std::vector<std::uint32_t> order = spec.offsets;
  if (order.empty()) order = random_footprint(spec.footprint, rng, g);
  for (const auto o : order) {
    if (o >= g.blocks_per_region) throw ConfigError("spatial: footprint offset outside the region");
  }
  Trace t;
  t.reserve(spec.pages * order.size());
  for (std::size_t p = 0; p < spec.pages; ++p) {
    std::vector<std::uint32_t> page_order = order;
    if (spec.shuffle) std::shuffle(page_order.begin(), page_order.end(), rng);
    const std::uint64_t region = spec.base_region + 2 * p;
    for (const auto o : page_order) t.push_back(load(spec.pc, g.compose(region, o), g));
  }
  renumber(t);
  return t;
}

Trace gen_pointer_chase(const PointerChaseSpec& spec, const Geometry& g) {
  if (spec.n < 2 || spec.passes < 1) throw ConfigError("pointer-chase: n >= 2 and passes >= 1 required");
  std::mt19937_64 rng(spec.seed);
  // Node i points at node i+1 of the chain; the chain is visited in order.
  const auto chain = scattered_blocks(spec.n, 1ULL << 25, rng, g);
  Trace t;
  for (std::size_t p = 0; p < spec.passes; ++p) {
    if (p > 0 && spec.flush) t.push_back(flush_event());
    for (const auto b : chain) t.push_back(load(spec.pc, b, g));
  }
  renumber(t);
  return t;
}

Trace gen_spatiotemporal(const SpatioTemporalSpec& spec, const Geometry& g) {
  if (spec.regions < 1 || spec.active < 1 || spec.passes < 1) {
    throw ConfigError("spatiotemporal: regions, active and passes must be >= 1");
  }
  std::mt19937_64 rng(spec.seed);
  struct Region {
    Addr pc;
    std::uint64_t id;
    std::vector<std::uint32_t> order;
  };
  std::vector<Region> regions;
  const auto anchors = scattered_blocks(spec.regions, 1ULL << 27, rng, g);
  for (std::size_t i = 0; i < spec.regions; ++i) {
    regions.push_back({0x500000 + 4 * i, g.region(anchors[i]).region_id, random_footprint(spec.footprint, rng, g)});
  }

  Trace schedule;
  std::deque<std::pair<std::size_t, std::size_t>> active;  // region index, next position
  std::bernoulli_distribution start_new(0.4);
  std::size_t next_region = 0;
  while (next_region < regions.size() || !active.empty()) {
    const bool can_start = next_region < regions.size() && active.size() < spec.active;
    if (can_start && (active.empty() || start_new(rng))) {
      const Region& r = regions[next_region];
      schedule.push_back(load(r.pc, g.compose(r.id, r.order[0]), g));
      if (r.order.size() > 1) active.emplace_back(next_region, 1);
      ++next_region;
      continue;
    }
    auto& [idx, pos] = active.front();
    const Region& r = regions[idx];
    schedule.push_back(load(r.pc, g.compose(r.id, r.order[pos]), g));
    if (++pos == r.order.size()) active.pop_front();
  }

  Trace t;
  for (std::size_t p = 0; p < spec.passes; ++p) {
    if (p > 0 && spec.flush) t.push_back(flush_event());
    t.insert(t.end(), schedule.begin(), schedule.end());
  }
  renumber(t);
  return t;
}

Trace gen_mixed(const MixedSpec& spec, const Geometry& g) {
  const std::size_t quarter = std::max<std::size_t>(spec.n / 4, 8);
  std::vector<Trace> parts;
  parts.push_back(gen_strided({1ULL << 20, 1, quarter, 0x400100}, g));
  parts.push_back(gen_temporal({quarter / 2, 2, false, spec.seed, 0x400200}, g));
  SpatialSpec sp;
  sp.pages = std::max<std::size_t>(quarter / sp.footprint, 2);
  sp.seed = spec.seed + 1;
  parts.push_back(gen_spatial(sp, g));
  parts.push_back(gen_pointer_chase({quarter / 2, 2, false, spec.seed + 2, 0x400400}, g));

  // Split every part into runs of same-region accesses and deal them out
  // round-robin.
  std::vector<std::deque<Trace>> runs(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (const auto& ev : parts[i]) {
      const auto region = g.region(g.block(ev.addr)).region_id;
      if (runs[i].empty() || g.region(g.block(runs[i].back().back().addr)).region_id != region) {
        runs[i].emplace_back();
      }
      runs[i].back().push_back(ev);
    }
  }
  Trace t;
  bool any = true;
  while (any) {
    any = false;
    for (auto& q : runs) {
      if (q.empty()) continue;
      any = true;
      t.insert(t.end(), q.front().begin(), q.front().end());
      q.pop_front();
    }
  }
  renumber(t);
  return t;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string_view::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

class SpecArgs {
 public:
  SpecArgs(std::string kind, std::map<std::string, std::string> kv) : kind_(std::move(kind)), kv_(std::move(kv)) {}

  std::uint64_t u(const std::string& key, std::uint64_t fallback) {
    const auto it = take(key);
    if (!it) return fallback;
    std::string_view sv = *it;
    int base = 10;
    if (sv.size() > 2 && sv[0] == '0' && (sv[1] == 'x' || sv[1] == 'X')) {
      sv.remove_prefix(2);
      base = 16;
    }
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v, base);
    if (ec != std::errc{} || p != sv.data() + sv.size() || sv.empty()) bad(key, *it);
    return v;
  }

  std::int64_t i(const std::string& key, std::int64_t fallback) {
    const auto it = take(key);
    if (!it) return fallback;
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(it->data(), it->data() + it->size(), v);
    if (ec != std::errc{} || p != it->data() + it->size() || it->empty()) bad(key, *it);
    return v;
  }

  bool b(const std::string& key, bool fallback) {
    const auto it = take(key);
    if (!it) return fallback;
    if (*it == "1" || *it == "true") return true;
    if (*it == "0" || *it == "false") return false;
    bad(key, *it);
    return false;
  }

  std::vector<std::uint32_t> list(const std::string& key) {
    std::vector<std::uint32_t> out;
    const auto it = take(key);
    if (!it) return out;
    std::string_view s = *it;
    while (!s.empty()) {
      const auto slash = s.find('/');
      const auto item = s.substr(0, slash);
      std::uint32_t v = 0;
      const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc{} || p != item.data() + item.size() || item.empty()) bad(key, *it);
      out.push_back(v);
      s = slash == std::string_view::npos ? std::string_view{} : s.substr(slash + 1);
    }
    return out;
  }

  void finish() const {
    if (!kv_.empty()) throw ConfigError(kind_ + ": unknown workload parameter '" + kv_.begin()->first + "'");
  }

 private:
  std::optional<std::string> take(const std::string& key) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    std::string v = it->second;
    kv_.erase(it);
    return v;
  }

  [[noreturn]] void bad(const std::string& key, const std::string& v) const {
    throw ConfigError(kind_ + ": bad value '" + v + "' for '" + key + "'");
  }

  std::string kind_;
  std::map<std::string, std::string> kv_;
};

}  // namespace

Trace generate_workload(const std::string& text, const Geometry& g) {
  const auto colon = text.find(':');
  const std::string kind(trim(std::string_view(text).substr(0, colon)));
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    std::string_view rest = std::string_view(text).substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw ConfigError("workload: expected key=value, got '" + std::string(item) + "'");
      kv[std::string(trim(item.substr(0, eq)))] = std::string(trim(item.substr(eq + 1)));
    }
  }
  SpecArgs a(kind, std::move(kv));
  Trace t;
  if (kind == "strided") {
    StridedSpec s;
    s.base = a.u("base", s.base);
    s.stride = a.i("stride", s.stride);
    s.n = a.u("n", s.n);
    s.pc = a.u("pc", s.pc);
    a.finish();
    t = gen_strided(s, g);
  } else if (kind == "temporal") {
    TemporalSpec s;
    s.seq = a.u("seq", s.seq);
    s.repeats = a.u("repeats", s.repeats);
    s.flush = a.b("flush", s.flush);
    s.seed = a.u("seed", s.seed);
    a.finish();
    t = gen_temporal(s, g);
  } else if (kind == "spatial") {
    SpatialSpec s;
    s.offsets = a.list("offsets");
    s.footprint = a.u("footprint", s.footprint);
    s.pages = a.u("pages", s.pages);
    s.shuffle = a.b("shuffle", s.shuffle);
    s.seed = a.u("seed", s.seed);
    a.finish();
    t = gen_spatial(s, g);
  } else if (kind == "pointer-chase") {
    PointerChaseSpec s;
    s.n = a.u("n", s.n);
    s.passes = a.u("passes", s.passes);
    s.flush = a.b("flush", s.flush);
    s.seed = a.u("seed", s.seed);
    a.finish();
    t = gen_pointer_chase(s, g);
  } else if (kind == "spatiotemporal") {
    SpatioTemporalSpec s;
    s.regions = a.u("regions", s.regions);
    s.footprint = a.u("footprint", s.footprint);
    s.active = a.u("active", s.active);
    s.passes = a.u("passes", s.passes);
    s.flush = a.b("flush", s.flush);
    s.seed = a.u("seed", s.seed);
    a.finish();
    t = gen_spatiotemporal(s, g);
  } else if (kind == "mixed") {
    MixedSpec s;
    s.n = a.u("n", s.n);
    s.seed = a.u("seed", s.seed);
    a.finish();
    t = gen_mixed(s, g);
  } else {
    throw ConfigError("unknown workload kind '" + kind + "'");
  }
  return t;
}

}  // namespace prefetchlab
