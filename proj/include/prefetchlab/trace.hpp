#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "prefetchlab/core.hpp"

namespace prefetchlab {

using Trace = std::vector<AccessEvent>;

// One parsed text line. `seq` is set only when the record carried an explicit
// third column; otherwise the reader assigns the next sequence number.
struct TraceRecord {
  AccessEvent event;
  std::optional<Seq> seq;
};

// Text grammar, one record per line:
//   <pc-hex> <addr-hex> [<seq-dec>]
//   flush
// Hex fields accept an optional 0x prefix. `#` starts a comment. Returns
// nullopt for blank and comment-only lines.
std::optional<TraceRecord> parse_trace_record(std::string_view line, std::size_t line_no);

// Parses a whole text trace, assigning sequence numbers in reader order and
// rejecting explicit sequence numbers that do not strictly increase.
Trace parse_text_trace(std::string_view text);

// Binary traces (.btrace) are fixed 16-byte little-endian records: 8-byte pc
// then 8-byte addr. A record with both fields all-ones encodes a flush.
Trace parse_binary_trace(std::string_view bytes);
std::string encode_binary_trace(const Trace& trace);
std::string encode_text_trace(const Trace& trace);

// Picks the format from the extension (.btrace is binary, anything else text).
Trace read_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path, const Trace& trace);

}  // namespace prefetchlab
