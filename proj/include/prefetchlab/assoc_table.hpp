#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "prefetchlab/core.hpp"

namespace prefetchlab {

// Bounded set-associative key/value store with true-LRU replacement inside
// each set. Backs every metadata table that the prefetchers keep on chip.
template <typename Key, typename Value, typename Hash = std::hash<Key>>
class AssocTable {
 public:
  struct Entry {
    Key key{};
    Value value{};
    std::uint64_t stamp = 0;
    bool valid = false;
  };

  AssocTable(std::size_t entries, std::size_t ways) : ways_(ways) {
    if (ways == 0 || entries == 0 || entries % ways != 0) {
      throw ConfigError("table geometry: entries must be a positive multiple of ways");
    }
    sets_ = entries / ways;
    slots_.resize(entries);
  }

  std::size_t sets() const { return sets_; }
  std::size_t ways() const { return ways_; }
  std::size_t capacity() const { return slots_.size(); }

  std::size_t set_of(const Key& key) const { return Hash{}(key) % sets_; }

  // Lookup that refreshes LRU position.
  Value* find(const Key& key) {
    Entry* e = locate(key);
    if (!e) return nullptr;
    e->stamp = ++clock_;
    return &e->value;
  }

  // Lookup without disturbing replacement state.
  const Value* peek(const Key& key) const {
    const Entry* e = const_cast<AssocTable*>(this)->locate(key);
    return e ? &e->value : nullptr;
  }

  bool contains(const Key& key) const { return peek(key) != nullptr; }

  // Inserts or overwrites `key` and makes it MRU. Returns the displaced entry
  // when a valid victim had to be evicted.
  std::optional<std::pair<Key, Value>> insert(const Key& key, Value value) {
    if (Entry* e = locate(key)) {
      e->value = std::move(value);
      e->stamp = ++clock_;
      return std::nullopt;
    }
    const std::size_t base = set_of(key) * ways_;
    Entry* victim = &slots_[base];
    for (std::size_t w = 0; w < ways_; ++w) {
      Entry& cand = slots_[base + w];
      if (!cand.valid) {
        victim = &cand;
        break;
      }
      if (cand.stamp < victim->stamp) victim = &cand;
    }
    std::optional<std::pair<Key, Value>> evicted;
    if (victim->valid) evicted.emplace(victim->key, std::move(victim->value));
    *victim = Entry{key, std::move(value), ++clock_, true};
    return evicted;
  }

  bool erase(const Key& key) {
    Entry* e = locate(key);
    if (!e) return false;
    *e = Entry{};
    return true;
  }

  void clear() {
    for (auto& e : slots_) e = Entry{};
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& e : slots_) n += e.valid ? 1 : 0;
    return n;
  }

  // Visits every valid entry of one set in way order.
  template <typename F>
  void for_each_in_set(std::size_t set, F&& fn) {
    for (std::size_t w = 0; w < ways_; ++w) {
      Entry& e = slots_[set * ways_ + w];
      if (e.valid) fn(e);
    }
  }

  void touch(Entry& e) { e.stamp = ++clock_; }

 private:
  Entry* locate(const Key& key) {
    const std::size_t base = set_of(key) * ways_;
    for (std::size_t w = 0; w < ways_; ++w) {
      Entry& e = slots_[base + w];
      if (e.valid && e.key == key) return &e;
    }
    return nullptr;
  }

  std::size_t sets_ = 1;
  std::size_t ways_ = 1;
  std::vector<Entry> slots_;
  std::uint64_t clock_ = 0;
};

// splitmix64 finalizer; spreads structured keys (pcs, block addresses) evenly
// over table sets.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct MixHash {
  std::size_t operator()(std::uint64_t v) const { return static_cast<std::size_t>(mix64(v)); }
};

}  // namespace prefetchlab
