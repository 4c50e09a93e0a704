#include "prefetchlab/core.hpp"

namespace prefetchlab {

BlockAddress block_of(Addr addr, std::uint64_t block_size) {
  if (!is_power_of_two(block_size)) {
    throw ConfigError("block size must be a non-zero power of two, got " +
                      std::to_string(block_size));
  }
  return addr / block_size;
}

RegionCoordinates region_of(BlockAddress block, std::uint64_t blocks_per_region) {
  if (!is_power_of_two(blocks_per_region)) {
    throw ConfigError("blocks per region must be a non-zero power of two, got " +
                      std::to_string(blocks_per_region));
  }
  return {block / blocks_per_region, static_cast<std::uint32_t>(block % blocks_per_region)};
}

void Geometry::validate() const {
  if (!is_power_of_two(block_bytes)) {
    throw ConfigError("cache.block_size must be a power of two");
  }
  if (!is_power_of_two(blocks_per_region) || blocks_per_region > kMaxRegionBlocks) {
    throw ConfigError("region.blocks must be a power of two no larger than 64");
  }
}

}  // namespace prefetchlab
