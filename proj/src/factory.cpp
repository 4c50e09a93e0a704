#include "prefetchlab/factory.hpp"

#include <algorithm>

#include "prefetchlab/rmd.hpp"
#include "prefetchlab/spatial.hpp"
#include "prefetchlab/spatio_temporal.hpp"
#include "prefetchlab/stride_offset.hpp"
#include "prefetchlab/temporal.hpp"

namespace prefetchlab {

const std::vector<std::string>& prefetcher_names() {
  static const std::vector<std::string> names = {"none", "ibsp",   "sp",    "bop",   "mlop",  "sms", "vldp",
                                                 "bingo", "stms", "domino", "isb", "stems", "rmd"};
  return names;
}

Geometry geometry_from(const Config& config) {
  Geometry g;
  g.block_bytes = config.get_uint("cache.block_size", 64);
  g.blocks_per_region = config.get_uint("region.blocks", 32);
  g.validate();
  return g;
}

std::unique_ptr<Prefetcher> make_prefetcher(const Config& c, const Geometry& g) {
  const std::string name = c.get_string("prefetcher.name", "none");
  const std::size_t degree = c.get_uint("prefetcher.degree", 4);
  const Seq meta_latency = c.get_uint("metadata.latency_events", 0);

  if (name == "none") return std::make_unique<NoPrefetcher>();
  if (name == "ibsp") {
    IbspParams p;
    p.entries = c.get_uint("ibsp.entries", p.entries);
    p.ways = c.get_uint("ibsp.ways", p.ways);
    p.lookahead = c.get_uint("ibsp.lookahead", p.lookahead);
    return std::make_unique<IbspPrefetcher>(g, p);
  }
  if (name == "sp" || name == "bop" || name == "mlop") {
    OffsetParams p;
    std::tie(p.min_offset, p.max_offset) = c.get_range("offset.range", {p.min_offset, p.max_offset});
    p.window = c.get_uint("offset.window", p.window);
    p.sp_threshold = c.get_double("sp.threshold", p.sp_threshold);
    p.timely_distance = c.get_uint("memory.latency_events", 32);
    if (name == "sp") return std::make_unique<SandboxPrefetcher>(g, p);
    if (name == "bop") return std::make_unique<BestOffsetPrefetcher>(g, p);
    p.mlop_levels = c.get_uint("mlop.levels", p.mlop_levels);
    p.window = c.get_uint("mlop.window", p.window);
    p.amt_rows = c.get_uint("mlop.amt_rows", p.amt_rows);
    return std::make_unique<MlopPrefetcher>(g, p);
  }
  if (name == "sms") {
    SmsParams p;
    p.pht_entries = c.get_uint("sms.pht_entries", p.pht_entries);
    p.pht_ways = c.get_uint("sms.pht_ways", p.pht_ways);
    p.generation_timeout = c.get_uint("sms.generation_timeout", p.generation_timeout);
    return std::make_unique<SmsPrefetcher>(g, p);
  }
  if (name == "bingo") {
    BingoParams p;
    p.sets = c.get_uint("bingo.sets", p.sets);
    p.ways = c.get_uint("bingo.ways", p.ways);
    p.generation_timeout = c.get_uint("sms.generation_timeout", p.generation_timeout);
    return std::make_unique<BingoPrefetcher>(g, p);
  }
  if (name == "vldp") {
    VldpParams p;
    p.dpt_orders = c.get_uint("vldp.dpt_orders", p.dpt_orders);
    p.dpt_entries = c.get_uint("vldp.dpt_entries", p.dpt_entries);
    p.dhb_entries = c.get_uint("vldp.dhb_entries", p.dhb_entries);
    p.degree = degree;
    return std::make_unique<VldpPrefetcher>(g, p);
  }
  if (name == "stms") {
    TemporalParams p;
    p.history_entries = c.get_uint("stms.history_entries", p.history_entries);
    p.index_entries = c.get_uint("stms.index_entries", p.index_entries);
    p.index_ways = c.get_uint("stms.index_ways", p.index_ways);
    p.streams = c.get_uint("stms.streams", p.streams);
    p.degree = degree;
    p.metadata_latency = meta_latency;
    p.block_bytes = g.block_bytes;
    return std::make_unique<StmsPrefetcher>(p);
  }
  if (name == "domino") {
    DominoParams p;
    p.rows = c.get_uint("domino.rows", p.rows);
    p.super_entries = c.get_uint("domino.super_entries", p.super_entries);
    p.entries = c.get_uint("domino.entries", p.entries);
    p.history_entries = c.get_uint("stms.history_entries", p.history_entries);
    p.degree = degree;
    p.metadata_latency = meta_latency;
    p.block_bytes = g.block_bytes;
    return std::make_unique<DominoPrefetcher>(p);
  }
  if (name == "isb") {
    IsbParams p;
    p.chunk = c.get_uint("isb.chunk", p.chunk);
    p.onchip_pages = c.get_uint("isb.onchip_pages", p.onchip_pages);
    p.blocks_per_page = std::max<std::uint64_t>(1, 4096 / g.block_bytes);
    p.degree = degree;
    p.block_bytes = g.block_bytes;
    return std::make_unique<IsbPrefetcher>(p);
  }
  if (name == "stems") {
    StemsParams p;
    p.rmob_entries = c.get_uint("stems.rmob_entries", p.rmob_entries);
    p.pst_entries = c.get_uint("stems.pst_entries", p.pst_entries);
    p.lookback = c.get_uint("stems.lookback", p.lookback);
    p.index_entries = c.get_uint("stms.index_entries", p.index_entries);
    p.index_ways = c.get_uint("stms.index_ways", p.index_ways);
    p.generation_timeout = c.get_uint("sms.generation_timeout", p.generation_timeout);
    p.degree = degree;
    return std::make_unique<StemsPrefetcher>(g, p);
  }
  if (name == "rmd") {
    RmdParams p;
    p.backend = parse_rmd_backend(c.get_string("rmd.backend", "address"));
    p.cap = c.get_uint("rmd.cap", p.cap);
    p.entries = c.get_uint("rmd.entries", p.entries);
    p.ways = c.get_uint("rmd.ways", p.ways);
    p.naive_degree = c.get_uint("rmd.naive_degree", p.naive_degree);
    return std::make_unique<RmdPrefetcher>(g, p);
  }
  throw ConfigError("unknown prefetcher '" + name + "'");
}

}  // namespace prefetchlab
