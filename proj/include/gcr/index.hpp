#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gcr/codec.hpp"
#include "gcr/kg.hpp"
#include "gcr/trie.hpp"
#include "gcr/trie_cache.hpp"

namespace gcr {

// Reference vocabulary for a graph: the output headers, the arrow, then every
// word of every entity and relation surface string in id order.
Vocab reference_vocab(const KnowledgeGraph& kg);

struct PathTokenization {
  std::vector<TokenSequence> sequences;
  std::size_t skipped_unknown = 0;    // encoded with <unk>
  std::size_t skipped_roundtrip = 0;  // decode(encode(text)) != text
};

// Formats and encodes each path. Paths the vocabulary cannot express exactly
// are dropped (and logged) so that every trie branch decodes back to a
// grounded path string.
PathTokenization tokenize_paths(const KnowledgeGraph& kg, std::span<const ReasoningPath> paths, const Vocab& vocab);

struct TrieBuildStats {
  double retrieval_seconds = 0;
  double tokenization_seconds = 0;
  double trie_seconds = 0;
  std::size_t paths_found = 0;
  std::size_t paths_skipped = 0;
  std::uint64_t n_paths = 0;
  std::size_t n_nodes = 0;

  double total_seconds() const noexcept { return retrieval_seconds + tokenization_seconds + trie_seconds; }
};

// One trie over the union of the entities' paths of up to `hops` hops.
// Retrieval, tokenization and insertion run per entity on up to `jobs` threads.
KGTrie build_question_trie(const KnowledgeGraph& kg, std::span<const EntityId> entities, std::uint32_t hops,
                           const Vocab& vocab, unsigned jobs = 1, TrieBuildStats* stats = nullptr);

// On-demand trie construction behind an LRU cache keyed by (entity set, hops,
// vocabulary fingerprint).
class TrieProvider {
 public:
  struct Lookup {
    std::shared_ptr<const KGTrie> trie;
    bool cache_hit = false;
    TrieBuildStats stats;  // zero on a hit
  };

  TrieProvider(const KnowledgeGraph& kg, const Vocab& vocab, std::uint32_t hops,
               std::size_t capacity = kDefaultTrieCacheCapacity, unsigned jobs = 1);

  Lookup get(std::span<const EntityId> entities);

  const TrieCache& cache() const noexcept { return cache_; }
  std::uint32_t hops() const noexcept { return hops_; }

 private:
  const KnowledgeGraph& kg_;
  const Vocab& vocab_;
  std::uint32_t hops_;
  unsigned jobs_;
  TrieCache cache_;
};

}  // namespace gcr
