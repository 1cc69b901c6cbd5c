#include "gcr/index.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <future>

#include <spdlog/spdlog.h>

#include "gcr/errors.hpp"

namespace gcr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn(i) for i in [0, n) on at most `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn fn) {
  jobs = std::max(1U, jobs);
  if (jobs == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> workers;
  for (unsigned w = 0; w < std::min<std::size_t>(jobs, n); ++w) {
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    }));
  }
  for (auto& f : workers) f.get();
}

}  // namespace

Vocab reference_vocab(const KnowledgeGraph& kg) {
  std::vector<std::string> corpus{std::string(kPathHeader), std::string(kAnswerHeader), std::string(kArrow)};
  corpus.reserve(corpus.size() + kg.n_entities() + kg.n_relations());
  for (std::uint32_t i = 0; i < kg.n_entities(); ++i) corpus.push_back(kg.entity_name(EntityId{i}));
  for (std::uint32_t i = 0; i < kg.n_relations(); ++i) corpus.push_back(kg.relation_name(RelationId{i}));
  return build_vocab(corpus);
}

PathTokenization tokenize_paths(const KnowledgeGraph& kg, std::span<const ReasoningPath> paths, const Vocab& vocab) {
  PathTokenization out;
  out.sequences.reserve(paths.size());
  for (const auto& p : paths) {
    const std::string text = format_path(kg, p);
    auto tokens = vocab.encode(text);
    if (std::find(tokens.begin(), tokens.end(), special::kUnk) != tokens.end()) {
      ++out.skipped_unknown;
      spdlog::warn("skipping path with out-of-vocabulary tokens: {}", text);
      continue;
    }
    if (vocab.decode(tokens) != text) {
      ++out.skipped_roundtrip;
      spdlog::warn("skipping path whose tokens do not decode to the same text: {}", text);
      continue;
    }
    out.sequences.push_back(std::move(tokens));
  }
  return out;
}

KGTrie build_question_trie(const KnowledgeGraph& kg, std::span<const EntityId> entities, std::uint32_t hops,
                           const Vocab& vocab, unsigned jobs, TrieBuildStats* stats) {
  std::vector<EntityId> roots(entities.begin(), entities.end());
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());

  TrieBuildStats local;
  auto t0 = Clock::now();
  std::vector<std::vector<ReasoningPath>> paths(roots.size());
  parallel_for(roots.size(), jobs, [&](std::size_t i) {
    paths[i] = enumerate_paths(kg, std::span<const EntityId>(&roots[i], 1), static_cast<int>(hops));
  });
  local.retrieval_seconds = seconds_since(t0);

  t0 = Clock::now();
  std::vector<PathTokenization> encoded(roots.size());
  parallel_for(roots.size(), jobs, [&](std::size_t i) { encoded[i] = tokenize_paths(kg, paths[i], vocab); });
  local.tokenization_seconds = seconds_since(t0);

  t0 = Clock::now();
  std::vector<std::vector<TokenSequence>> partitions;
  partitions.reserve(encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    local.paths_found += paths[i].size();
    local.paths_skipped += encoded[i].skipped_unknown + encoded[i].skipped_roundtrip;
    partitions.push_back(std::move(encoded[i].sequences));
  }
  KGTrie trie = build_trie_parallel(partitions, vocab.fingerprint(), hops, jobs);
  local.trie_seconds = seconds_since(t0);
  local.n_paths = trie.n_paths();
  local.n_nodes = trie.n_nodes();
  if (stats) *stats = local;
  return trie;
}

TrieKey TrieKey::make(std::vector<EntityId> entities, std::uint32_t hops, std::uint64_t vocab_fingerprint) {
  std::sort(entities.begin(), entities.end());
  entities.erase(std::unique(entities.begin(), entities.end()), entities.end());
  return TrieKey{std::move(entities), hops, vocab_fingerprint};
}

std::size_t TrieKeyHash::operator()(const TrieKey& k) const noexcept {
  std::uint64_t h = k.vocab_fingerprint ^ (static_cast<std::uint64_t>(k.hops) << 32);
  for (EntityId e : k.entities) h = (h ^ e.value) * 0x100000001b3ULL;
  return static_cast<std::size_t>(h ^ (h >> 31));
}

TrieProvider::TrieProvider(const KnowledgeGraph& kg, const Vocab& vocab, std::uint32_t hops, std::size_t capacity,
                           unsigned jobs)
    : kg_(kg), vocab_(vocab), hops_(hops), jobs_(jobs), cache_(capacity) {
  if (hops_ < 1) throw ConfigError("hops must be >= 1");
}

TrieProvider::Lookup TrieProvider::get(std::span<const EntityId> entities) {
  Lookup out;
  auto key = TrieKey::make({entities.begin(), entities.end()}, hops_, vocab_.fingerprint());
  bool built = false;
  out.trie = cache_.get_or_build(key, [&] {
    built = true;
    return build_question_trie(kg_, key.entities, hops_, vocab_, jobs_, &out.stats);
  });
  out.cache_hit = !built;
  return out;
}

}  // namespace gcr
