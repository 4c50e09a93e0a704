#pragma once

#include <memory>
#include <string>
#include <vector>

#include "prefetchlab/config.hpp"
#include "prefetchlab/prefetcher.hpp"

namespace prefetchlab {

const std::vector<std::string>& prefetcher_names();

// Builds the prefetcher selected by `prefetcher.name`. Unknown names and
// invalid parameters raise ConfigError.
std::unique_ptr<Prefetcher> make_prefetcher(const Config& config, const Geometry& geometry);

Geometry geometry_from(const Config& config);

}  // namespace prefetchlab
