#pragma once

#include <cstdint>
#include <functional>
#include <future>
#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "gcr/errors.hpp"
#include "gcr/kg.hpp"
#include "gcr/trie.hpp"

namespace gcr {

// Bounded LRU map with single-flight construction: concurrent misses on the
// same key run the builder once and every caller receives the same value.
template <typename Key, typename Value, typename Hash = std::hash<Key>>
class ConcurrentLruCache {
 public:
  using ValuePtr = std::shared_ptr<const Value>;
  using Builder = std::function<Value()>;

  explicit ConcurrentLruCache(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("cache capacity must be >= 1");
  }

  ConcurrentLruCache(const ConcurrentLruCache&) = delete;
  ConcurrentLruCache& operator=(const ConcurrentLruCache&) = delete;

  // A builder exception propagates to every waiter and leaves the cache untouched.
  ValuePtr get_or_build(const Key& key, const Builder& build) {
    std::unique_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      ++hits_;
      recency_.splice(recency_.begin(), recency_, it->second.position);
      return it->second.value;
    }
    if (auto it = in_flight_.find(key); it != in_flight_.end()) {
      auto pending = it->second;
      ++hits_;
      lock.unlock();
      return pending.get();
    }
    std::promise<ValuePtr> promise;
    in_flight_.emplace(key, promise.get_future().share());
    lock.unlock();

    ValuePtr value;
    try {
      value = std::make_shared<const Value>(build());
    } catch (...) {
      lock.lock();
      in_flight_.erase(key);
      lock.unlock();
      promise.set_exception(std::current_exception());
      throw;
    }

    lock.lock();
    ++misses_;
    recency_.push_front(key);
    entries_.emplace(key, Entry{value, recency_.begin()});
    while (entries_.size() > capacity_) {
      entries_.erase(recency_.back());
      recency_.pop_back();
      ++evictions_;
    }
    in_flight_.erase(key);
    lock.unlock();
    promise.set_value(value);
    return value;
  }

  bool contains(const Key& key) const {
    std::lock_guard lock(mutex_);
    return entries_.contains(key);
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

  std::size_t capacity() const noexcept { return capacity_; }

  std::uint64_t hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
  }

  std::uint64_t misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
  }

  std::uint64_t evictions() const {
    std::lock_guard lock(mutex_);
    return evictions_;
  }

  // Most recently used first.
  std::vector<Key> keys() const {
    std::lock_guard lock(mutex_);
    return {recency_.begin(), recency_.end()};
  }

 private:
  struct Entry {
    ValuePtr value;
    typename std::list<Key>::iterator position;
  };

  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Key> recency_;
  std::unordered_map<Key, Entry, Hash> entries_;
  std::unordered_map<Key, std::shared_future<ValuePtr>, Hash> in_flight_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t evictions_ = 0;
};

struct TrieKey {
  std::vector<EntityId> entities;  // sorted, unique
  std::uint32_t hops = 0;
  std::uint64_t vocab_fingerprint = 0;

  static TrieKey make(std::vector<EntityId> entities, std::uint32_t hops, std::uint64_t vocab_fingerprint);
  bool operator==(const TrieKey&) const = default;
};

struct TrieKeyHash {
  std::size_t operator()(const TrieKey& k) const noexcept;
};

inline constexpr std::size_t kDefaultTrieCacheCapacity = 1024;

using TrieCache = ConcurrentLruCache<TrieKey, KGTrie, TrieKeyHash>;

}  // namespace gcr
