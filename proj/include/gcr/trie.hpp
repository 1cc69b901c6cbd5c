#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcr/codec.hpp"

namespace gcr {

// Prefix tree over token sequences. Immutable once built; every query is a
// read-only walk from the root, so a trie may be shared by any number of
// threads.
class KGTrie {
 public:
  using NodeRef = std::uint32_t;
  static constexpr NodeRef kRoot = 0;

  struct Child {
    TokenId token;
    NodeRef node;
  };

  KGTrie();

  // Node reached by walking `prefix` from the root, or nullopt if the prefix
  // leaves the trie.
  std::optional<NodeRef> walk(std::span<const TokenId> prefix) const;
  std::optional<NodeRef> step(NodeRef node, TokenId token) const;
  std::span<const Child> children(NodeRef node) const;
  bool terminal(NodeRef node) const { return nodes_.at(node).terminal; }

  bool is_valid_prefix(std::span<const TokenId> prefix) const { return walk(prefix).has_value(); }
  // Throws TrieError if `prefix` is not a valid prefix.
  std::vector<TokenId> allowed_next(std::span<const TokenId> prefix) const;
  bool is_complete(std::span<const TokenId> prefix) const;

  bool empty() const noexcept { return n_paths_ == 0; }
  std::uint64_t n_paths() const noexcept { return n_paths_; }
  std::size_t n_nodes() const noexcept { return nodes_.size(); }

  std::uint64_t vocab_fingerprint() const noexcept { return fingerprint_; }
  std::uint32_t hops() const noexcept { return hops_; }

  // All stored sequences in lexicographic token order.
  std::vector<TokenSequence> sequences() const;

 private:
  friend class TrieBuilder;
  friend KGTrie deserialize_trie(std::istream& in);

  struct Node {
    std::vector<Child> children;  // sorted by token
    bool terminal = false;
  };

  std::vector<Node> nodes_;
  std::uint64_t n_paths_ = 0;
  std::uint64_t fingerprint_ = 0;
  std::uint32_t hops_ = 0;
};

// Incremental construction. Insertion order never affects the finished trie.
class TrieBuilder {
 public:
  TrieBuilder(std::uint64_t vocab_fingerprint = 0, std::uint32_t hops = 0);

  // Returns false if the sequence was already present. Empty sequences throw.
  bool insert(std::span<const TokenId> sequence);
  // Union with another builder; associative and commutative.
  void merge(const TrieBuilder& other);
  void merge(const KGTrie& other);

  std::uint64_t size() const noexcept { return trie_.n_paths_; }
  KGTrie build() &&;
  KGTrie snapshot() const;

 private:
  void merge_node(const KGTrie& src, KGTrie::NodeRef src_node, KGTrie::NodeRef dst_node);
  KGTrie::NodeRef child_or_insert(KGTrie::NodeRef node, TokenId token);

  KGTrie trie_;
};

KGTrie build_trie(std::span<const TokenSequence> sequences, std::uint64_t vocab_fingerprint = 0,
                  std::uint32_t hops = 0);

// Builds one sub-trie per partition on up to `jobs` threads, then merges.
KGTrie build_trie_parallel(std::span<const std::vector<TokenSequence>> partitions, std::uint64_t vocab_fingerprint,
                           std::uint32_t hops, unsigned jobs);

inline constexpr char kTrieMagic[4] = {'G', 'C', 'R', 'T'};
inline constexpr std::uint8_t kTrieVersion = 1;

// Binary layout (little-endian): "GCRT", version byte, vocab fingerprint u64,
// hops u32, path count u64, then the nodes in preorder. Each node is written
// as a child-count varint, (token varint, child subtree) pairs in token
// order, and a terminal byte.
void serialize_trie(const KGTrie& trie, std::ostream& out);
std::string serialize_trie(const KGTrie& trie);
KGTrie deserialize_trie(std::istream& in);
KGTrie deserialize_trie(std::string_view bytes);

void save_trie_file(const KGTrie& trie, const std::filesystem::path& path);
KGTrie load_trie_file(const std::filesystem::path& path);

// Non-empty message when the trie was built against a different vocabulary.
std::optional<std::string> fingerprint_warning(const KGTrie& trie, std::uint64_t runtime_fingerprint);

}  // namespace gcr
