#include "prefetchlab/temporal.hpp"

#include <algorithm>

namespace prefetchlab {

HistoryTable::HistoryTable(std::size_t capacity) : slots_(capacity) {
  if (capacity == 0) throw ConfigError("history table capacity must be >= 1");
}

std::uint64_t HistoryTable::append(BlockAddress block) {
  const std::uint64_t pos = head_++;
  slots_[pos % slots_.size()] = Slot{block, pos, true};
  return pos;
}

std::optional<BlockAddress> HistoryTable::read(std::uint64_t pos) const {
  if (pos >= head_) return std::nullopt;
  const Slot& s = slots_[pos % slots_.size()];
  if (!s.valid || s.pos != pos) return std::nullopt;
  return s.block;
}

void HistoryTable::clear() {
  for (auto& s : slots_) s = Slot{};
  head_ = 0;
}

void stms_train(BlockAddress miss, HistoryTable& ht, IndexTable& it) {
  it.insert(miss, ht.append(miss));
}

std::vector<BlockAddress> stms_predict(BlockAddress miss, const HistoryTable& ht, const IndexTable& it,
                                       std::size_t degree, std::uint64_t* pointer) {
  const std::uint64_t* pos = it.peek(miss);
  if (!pos) return {};
  const auto at = ht.read(*pos);
  if (!at || *at != miss) return {};
  if (pointer) *pointer = *pos;
  std::vector<BlockAddress> out;
  for (std::size_t i = 1; i <= degree; ++i) {
    const auto b = ht.read(*pos + i);
    if (!b) break;
    out.push_back(*b);
  }
  return out;
}

// ----- STMS -----

StmsPrefetcher::StmsPrefetcher(TemporalParams params)
    : params_(params),
      ht_(params.history_entries),
      it_(params.index_entries, params.index_ways) {
  if (params.streams == 0) throw ConfigError("stms.streams must be >= 1");
}

void StmsPrefetcher::read_history(std::uint64_t pos) {
  if (pos % HistoryTable::kEntriesPerBlock == 0) ++traffic_.reads;
}

std::vector<PrefetchRequest> StmsPrefetcher::on_trigger(const AccessEvent& event,
                                                        const AccessOutcome& outcome) {
  const BlockAddress block = block_of(event.addr, params_.block_bytes);
  std::vector<PrefetchRequest> out;

  if (outcome.cls != AccessClass::kDemandMiss) {
    // Covered access: the stream that fetched it moves one entry ahead.
    for (auto it = streams_.begin(); it != streams_.end(); ++it) {
      if (!it->outstanding.erase(block)) continue;
      if (const auto b = ht_.read(it->next_pos)) {
        read_history(it->next_pos);
        ++it->next_pos;
        it->outstanding.insert(*b);
        ++stream_advances_;
        out.push_back({*b, 1, name(), event.seq, 0});
      }
      streams_.splice(streams_.begin(), streams_, it);
      break;
    }
    return out;
  }

  std::uint64_t pointer = 0;
  const auto blocks = stms_predict(block, ht_, it_, params_.degree, &pointer);
  // Index lookup, then history read: two dependent off-chip accesses.
  const bool indexed = it_.contains(block);
  if (indexed) ++traffic_.reads;
  if (!blocks.empty()) {
    ++traffic_.reads;
    ++traffic_.stream_starts;
    traffic_.stream_start_reads += 2;
    const Seq delay = 2 * params_.metadata_latency;
    Stream s;
    s.next_pos = pointer + 1 + blocks.size();
    std::uint32_t rank = 1;
    for (const auto b : blocks) {
      s.outstanding.insert(b);
      out.push_back({b, rank++, name(), event.seq, delay});
    }
    streams_.push_front(std::move(s));
    if (streams_.size() > params_.streams) streams_.pop_back();
    if (log_starts_) starts_.push_back({event.seq, event.seq + delay});
  }

  stms_train(block, ht_, it_);
  ++traffic_.writes;  // index update
  if (++appended_ % HistoryTable::kEntriesPerBlock == 0) ++traffic_.writes;
  return out;
}

std::map<std::string, std::uint64_t> StmsPrefetcher::stats() const {
  return {{"stms.stream_starts", traffic_.stream_starts},
          {"stms.stream_start_reads", traffic_.stream_start_reads},
          {"stms.stream_advances", stream_advances_}};
}

// ----- Domino -----

const EitEntry* SuperEntry::mru() const {
  const EitEntry* best = nullptr;
  for (const auto& e : entries) {
    if (!best || e.stamp > best->stamp) best = &e;
  }
  return best;
}

const EitEntry* SuperEntry::match(BlockAddress next) const {
  for (const auto& e : entries) {
    if (e.next == next) return &e;
  }
  return nullptr;
}

EnhancedIndexTable::EnhancedIndexTable(std::size_t rows, std::size_t super_entries, std::size_t entries)
    : rows_(rows), supers_(super_entries), entries_(entries), table_(rows * super_entries) {
  if (rows == 0 || super_entries == 0 || entries == 0) {
    throw ConfigError("domino: rows, super_entries and entries must be >= 1");
  }
}

std::size_t EnhancedIndexTable::row_of(BlockAddress tag) const {
  return static_cast<std::size_t>(mix64(tag) % rows_);
}

std::optional<SuperEntry> EnhancedIndexTable::lookup(BlockAddress tag) {
  SuperEntry* row = &table_[row_of(tag) * supers_];
  for (std::size_t i = 0; i < supers_; ++i) {
    if (row[i].valid && row[i].tag == tag) {
      row[i].stamp = ++clock_;
      return row[i];
    }
  }
  return std::nullopt;
}

void EnhancedIndexTable::update(BlockAddress prev, BlockAddress next, std::uint64_t next_pos) {
  SuperEntry* row = &table_[row_of(prev) * supers_];
  SuperEntry* se = nullptr;
  for (std::size_t i = 0; i < supers_; ++i) {
    if (row[i].valid && row[i].tag == prev) se = &row[i];
  }
  if (!se) {
    se = row;
    for (std::size_t i = 0; i < supers_; ++i) {
      if (!row[i].valid) {
        se = &row[i];
        break;
      }
      if (row[i].stamp < se->stamp) se = &row[i];
    }
    *se = SuperEntry{prev, {}, 0, true};
  }
  se->stamp = ++clock_;
  for (auto& e : se->entries) {
    if (e.next == next) {
      e.pos = next_pos;
      e.stamp = ++clock_;
      return;
    }
  }
  if (se->entries.size() < entries_) {
    se->entries.push_back({next, next_pos, ++clock_});
    return;
  }
  auto victim = std::min_element(se->entries.begin(), se->entries.end(),
                                 [](const EitEntry& a, const EitEntry& b) { return a.stamp < b.stamp; });
  *victim = {next, next_pos, ++clock_};
}

DominoPrefetcher::DominoPrefetcher(DominoParams params)
    : params_(params),
      eit_(params.rows, params.super_entries, params.entries),
      ht_(params.history_entries) {}

std::vector<PrefetchRequest> DominoPrefetcher::stream_from(std::uint64_t pos, std::size_t count, Seq delay,
                                                           Seq seq) {
  std::vector<PrefetchRequest> out;
  std::uint32_t rank = 1;
  for (std::size_t i = 0; i < count; ++i) {
    const auto b = ht_.read(pos);
    if (!b) break;
    outstanding_.insert(*b);
    out.push_back({*b, rank++, name(), seq, delay});
    ++pos;
  }
  stream_pos_ = pos;
  return out;
}

std::vector<PrefetchRequest> DominoPrefetcher::on_trigger(const AccessEvent& event,
                                                          const AccessOutcome& outcome) {
  const BlockAddress block = block_of(event.addr, params_.block_bytes);
  const Seq lm = params_.metadata_latency;
  std::vector<PrefetchRequest> out;

  const bool covered = outcome.cls != AccessClass::kDemandMiss;
  const EitEntry* hit = state_ == State::kHolding ? held_.match(block) : nullptr;
  if (state_ == State::kStreaming && covered && outstanding_.erase(block)) {
    out = stream_from(stream_pos_, 1, 0, event.seq);
    if (stream_pos_ % HistoryTable::kEntriesPerBlock == 0) ++traffic_.reads;
  } else if (hit && ht_.read(hit->pos) == block) {
    // Second miss confirmed the stream: read history after it.
    ++two_miss_matches_;
    ++traffic_.reads;
    outstanding_.clear();
    out = stream_from(hit->pos + 1, params_.degree, lm, event.seq);
    state_ = out.empty() ? State::kIdle : State::kStreaming;
  } else {
    ++traffic_.reads;
    const auto se = eit_.lookup(block);
    state_ = State::kIdle;
    if (se && !se->entries.empty()) {
      held_ = *se;
      state_ = State::kHolding;
      ++traffic_.stream_starts;
      ++traffic_.stream_start_reads;
      out.push_back({held_.mru()->next, 1, name(), event.seq, lm});
      if (log_starts_) starts_.push_back({event.seq, event.seq + lm});
    }
  }

  const std::uint64_t pos = ht_.append(block);
  if (prev_) {
    eit_.update(*prev_, block, pos);
    ++traffic_.writes;
  }
  prev_ = block;
  if (++appended_ % HistoryTable::kEntriesPerBlock == 0) ++traffic_.writes;
  return out;
}

std::map<std::string, std::uint64_t> DominoPrefetcher::stats() const {
  return {{"domino.stream_starts", traffic_.stream_starts},
          {"domino.two_miss_matches", two_miss_matches_}};
}

// ----- ISB -----

StructuralMaps::StructuralMaps(std::uint64_t chunk) : chunk_(chunk) {
  if (chunk < 2) throw ConfigError("isb.chunk must be >= 2");
}

std::optional<std::uint64_t> StructuralMaps::structural(BlockAddress block) const {
  const auto it = psam_.find(block);
  if (it == psam_.end()) return std::nullopt;
  return it->second;
}

std::optional<BlockAddress> StructuralMaps::physical(std::uint64_t s) const {
  const auto it = spam_.find(s);
  if (it == spam_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t StructuralMaps::fresh_chunk() {
  // Runs may spill past their chunk, so skip chunks that already hold entries.
  while (chunk_use_.contains(next_chunk_)) ++next_chunk_;
  ++chunks_allocated_;
  return (next_chunk_++) * chunk_;
}

void StructuralMaps::map(BlockAddress block, std::uint64_t s) {
  psam_[block] = s;
  confidence_[block] = 1;
  spam_[s] = block;
  ++chunk_use_[s / chunk_];
}

void StructuralMaps::unmap(BlockAddress block) {
  const auto it = psam_.find(block);
  if (it == psam_.end()) return;
  const std::uint64_t s = it->second;
  spam_.erase(s);
  psam_.erase(it);
  confidence_.erase(block);
  if (--chunk_use_[s / chunk_] == 0) chunk_use_.erase(s / chunk_);
}

void StructuralMaps::train(BlockAddress x, BlockAddress y) {
  if (x == y) return;
  if (!psam_.contains(x)) map(x, fresh_chunk());
  const std::uint64_t target = psam_.at(x) + 1;
  const auto occupant = physical(target);
  if (occupant == y) {
    auto& c = confidence_[y];
    c = std::min<std::uint8_t>(c + 1, kMaxConfidence);
    return;
  }
  if (!occupant) {
    // A mapped block gives up its slot only once its confidence is spent.
    if (const auto it = confidence_.find(y); it != confidence_.end() && it->second > 0) {
      --it->second;
      return;
    }
    unmap(y);
    map(y, target);
    return;
  }
  if (!psam_.contains(y)) map(y, fresh_chunk());
}

std::vector<BlockAddress> StructuralMaps::predict(BlockAddress block, std::size_t degree) const {
  const auto s = structural(block);
  if (!s) return {};
  std::vector<BlockAddress> out;
  for (std::size_t i = 1; i <= degree; ++i) {
    const auto b = physical(*s + i);
    if (!b) break;
    out.push_back(*b);
  }
  return out;
}

bool StructuralMaps::consistent() const {
  if (psam_.size() != spam_.size() || confidence_.size() != psam_.size()) return false;
  for (const auto& [b, s] : psam_) {
    const auto it = spam_.find(s);
    if (it == spam_.end() || it->second != b) return false;
  }
  for (const auto& [s, b] : spam_) {
    const auto it = psam_.find(b);
    if (it == psam_.end() || it->second != s) return false;
  }
  return true;
}

IsbPrefetcher::IsbPrefetcher(IsbParams params) : params_(params), maps_(params.chunk) {
  if (params.onchip_pages == 0) throw ConfigError("isb.onchip_pages must be >= 1");
}

void IsbPrefetcher::touch_page(BlockAddress block) {
  const std::uint64_t page = block / params_.blocks_per_page;
  if (const auto it = page_pos_.find(page); it != page_pos_.end()) {
    pages_.splice(pages_.begin(), pages_, it->second);
    return;
  }
  ++traffic_.reads;
  pages_.push_front(page);
  page_pos_[page] = pages_.begin();
  if (pages_.size() > params_.onchip_pages) {
    page_pos_.erase(pages_.back());
    pages_.pop_back();
    ++traffic_.writes;
  }
}

std::vector<PrefetchRequest> IsbPrefetcher::on_trigger(const AccessEvent& event, const AccessOutcome&) {
  const BlockAddress block = block_of(event.addr, params_.block_bytes);
  touch_page(block);
  if (const auto it = last_miss_.find(event.pc); it != last_miss_.end()) maps_.train(it->second, block);
  last_miss_[event.pc] = block;
  std::vector<PrefetchRequest> out;
  std::uint32_t rank = 1;
  for (const auto b : maps_.predict(block, params_.degree)) out.push_back({b, rank++, name(), event.seq, 0});
  return out;
}

std::map<std::string, std::uint64_t> IsbPrefetcher::stats() const {
  return {{"isb.mapped_blocks", maps_.size()}, {"isb.chunks_allocated", maps_.chunks_allocated()}};
}

}  // namespace prefetchlab
