#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace prefetchlab {

using Addr = std::uint64_t;
using BlockAddress = std::uint64_t;
using Delta = std::int64_t;
using Seq = std::uint64_t;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AccessKind : std::uint8_t {
  kLoad,
  // Invalidates the whole cache; carries no address.
  kFlush,
};

struct AccessEvent {
  Addr pc = 0;
  Addr addr = 0;
  Seq seq = 0;
  AccessKind kind = AccessKind::kLoad;

  bool is_flush() const { return kind == AccessKind::kFlush; }
  friend bool operator==(const AccessEvent&, const AccessEvent&) = default;
};

struct RegionCoordinates {
  std::uint64_t region_id = 0;
  std::uint32_t offset = 0;
  friend bool operator==(const RegionCoordinates&, const RegionCoordinates&) = default;
};

constexpr bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

BlockAddress block_of(Addr addr, std::uint64_t block_size);
RegionCoordinates region_of(BlockAddress block, std::uint64_t blocks_per_region);

// Block and region sizes shared by the cache and every prefetcher.
struct Geometry {
  std::uint64_t block_bytes = 64;
  std::uint64_t blocks_per_region = 32;

  // Footprints are stored as 64-bit masks, so regions are capped at 64 blocks.
  static constexpr std::uint64_t kMaxRegionBlocks = 64;

  void validate() const;
  BlockAddress block(Addr addr) const { return block_of(addr, block_bytes); }
  RegionCoordinates region(BlockAddress b) const { return region_of(b, blocks_per_region); }
  BlockAddress compose(std::uint64_t region_id, std::uint32_t offset) const {
    return region_id * blocks_per_region + offset;
  }
};

}  // namespace prefetchlab
