#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prefetchlab/trace.hpp"

namespace prefetchlab {

struct StridedSpec {
  BlockAddress base = 1ULL << 20;
  std::int64_t stride = 1;
  std::size_t n = 10000;
  Addr pc = 0x400100;
};

struct TemporalSpec {
  std::size_t seq = 1000;
  std::size_t repeats = 2;
  bool flush = true;
  std::uint64_t seed = 1;
  Addr pc = 0x400200;
};

struct SpatialSpec {
  // Explicit footprint offsets in access order; when empty, `footprint`
  // offsets are drawn from the seed.
  std::vector<std::uint32_t> offsets;
  std::size_t footprint = 6;
  std::size_t pages = 100;
  // Per-page random permutation of the footprint order.
  bool shuffle = false;
  std::uint64_t seed = 1;
  std::uint64_t base_region = 1ULL << 24;
  Addr pc = 0x400300;
};

struct PointerChaseSpec {
  std::size_t n = 1000;
  std::size_t passes = 2;
  bool flush = true;
  std::uint64_t seed = 1;
  Addr pc = 0x400400;
};

// Regions with distinct pcs and ordered footprints, at most `active` of them
// in flight at once, serviced oldest first; the whole schedule repeats.
struct SpatioTemporalSpec {
  std::size_t regions = 200;
  std::size_t footprint = 6;
  std::size_t active = 3;
  std::size_t passes = 2;
  bool flush = true;
  std::uint64_t seed = 1;
};

struct MixedSpec {
  std::size_t n = 20000;
  std::uint64_t seed = 1;
};

Trace gen_strided(const StridedSpec& spec, const Geometry& g = {});
Trace gen_temporal(const TemporalSpec& spec, const Geometry& g = {});
Trace gen_spatial(const SpatialSpec& spec, const Geometry& g = {});
Trace gen_pointer_chase(const PointerChaseSpec& spec, const Geometry& g = {});
Trace gen_spatiotemporal(const SpatioTemporalSpec& spec, const Geometry& g = {});
Trace gen_mixed(const MixedSpec& spec, const Geometry& g = {});

// Builds a trace from "kind:key=value,..." (kind alone uses defaults). Kinds:
// strided, temporal, spatial, pointer-chase, spatiotemporal, mixed.
Trace generate_workload(const std::string& spec, const Geometry& g = {});

// Assigns seq = index to every event.
void renumber(Trace& trace);

}  // namespace prefetchlab
