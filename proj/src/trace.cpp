#include "prefetchlab/trace.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace prefetchlab {
namespace {

constexpr Addr kFlushMarker = std::numeric_limits<Addr>::max();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<std::uint64_t> parse_hex(std::string_view tok) {
  if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) tok.remove_prefix(2);
  if (tok.empty()) return std::nullopt;
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value, 16);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) return std::nullopt;
  return value;
}

std::optional<std::uint64_t> parse_dec(std::string_view tok) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value, 10);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty()) return std::nullopt;
  return value;
}

std::uint64_t load_le64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

void store_le64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(v & 0xff));
    v >>= 8;
  }
}

bool is_binary_path(const std::filesystem::path& path) { return path.extension() == ".btrace"; }

}  // namespace

std::optional<TraceRecord> parse_trace_record(std::string_view line, std::size_t line_no) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  line = trim(line);
  if (line.empty()) return std::nullopt;

  std::array<std::string_view, 4> fields{};
  std::size_t n = 0;
  while (!line.empty()) {
    const auto end = line.find_first_of(" \t");
    if (n == fields.size()) throw ParseError(line_no, "too many fields");
    fields[n++] = line.substr(0, end);
    if (end == std::string_view::npos) break;
    line = trim(line.substr(end));
  }

  if (n == 1 && fields[0] == "flush") {
    return TraceRecord{AccessEvent{0, 0, 0, AccessKind::kFlush}, std::nullopt};
  }
  if (n < 2 || n > 3) {
    throw ParseError(line_no, "expected '<pc-hex> <addr-hex> [<seq>]'");
  }
  const auto pc = parse_hex(fields[0]);
  const auto addr = parse_hex(fields[1]);
  if (!pc) throw ParseError(line_no, "bad pc '" + std::string(fields[0]) + "'");
  if (!addr) throw ParseError(line_no, "bad address '" + std::string(fields[1]) + "'");

  TraceRecord rec{AccessEvent{*pc, *addr, 0, AccessKind::kLoad}, std::nullopt};
  if (n == 3) {
    const auto seq = parse_dec(fields[2]);
    if (!seq) throw ParseError(line_no, "bad sequence number '" + std::string(fields[2]) + "'");
    rec.seq = *seq;
  }
  return rec;
}

Trace parse_text_trace(std::string_view text) {
  Trace trace;
  std::size_t line_no = 0;
  std::optional<Seq> last;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    auto rec = parse_trace_record(line, line_no);
    if (!rec) continue;
    Seq seq = last ? *last + 1 : 0;
    if (rec->seq) {
      if (last && *rec->seq <= *last) {
        throw ParseError(line_no, "sequence number " + std::to_string(*rec->seq) +
                                      " does not follow " + std::to_string(*last));
      }
      seq = *rec->seq;
    }
    rec->event.seq = seq;
    last = seq;
    trace.push_back(rec->event);
  }
  return trace;
}

Trace parse_binary_trace(std::string_view bytes) {
  constexpr std::size_t kRecord = 16;
  if (bytes.size() % kRecord != 0) {
    throw ParseError(bytes.size() / kRecord + 1, "truncated binary record");
  }
  Trace trace;
  trace.reserve(bytes.size() / kRecord);
  for (std::size_t i = 0; i < bytes.size() / kRecord; ++i) {
    const char* p = bytes.data() + i * kRecord;
    AccessEvent ev{load_le64(p), load_le64(p + 8), i, AccessKind::kLoad};
    if (ev.pc == kFlushMarker && ev.addr == kFlushMarker) ev = {0, 0, i, AccessKind::kFlush};
    trace.push_back(ev);
  }
  return trace;
}

std::string encode_binary_trace(const Trace& trace) {
  std::string out;
  out.reserve(trace.size() * 16);
  for (const auto& ev : trace) {
    store_le64(out, ev.is_flush() ? kFlushMarker : ev.pc);
    store_le64(out, ev.is_flush() ? kFlushMarker : ev.addr);
  }
  return out;
}

std::string encode_text_trace(const Trace& trace) {
  std::ostringstream os;
  os << std::hex;
  for (const auto& ev : trace) {
    if (ev.is_flush()) {
      os << "flush\n";
    } else {
      os << "0x" << ev.pc << " 0x" << ev.addr << '\n';
    }
  }
  return os.str();
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading trace '" + path.string() + "'");
  const std::string data = buf.str();
  return is_binary_path(path) ? parse_binary_trace(data) : parse_text_trace(data);
}

void write_trace(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace '" + path.string() + "'");
  out << (is_binary_path(path) ? encode_binary_trace(trace) : encode_text_trace(trace));
  if (!out) throw IoError("error writing trace '" + path.string() + "'");
}

}  // namespace prefetchlab
