#include "gcr/trie.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>

#include "gcr/errors.hpp"

namespace gcr {

namespace {

bool token_less(const KGTrie::Child& c, TokenId t) { return c.token < t; }

void put_varint(std::ostream& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.put(static_cast<char>((v & 0x7F) | 0x80));
    v >>= 7;
  }
  out.put(static_cast<char>(v));
}

template <typename T>
void put_le(std::ostream& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

[[noreturn]] void truncated() { throw TrieFormatError(FormatErrorKind::kTruncated, "trie file is truncated"); }

std::uint8_t get_byte(std::istream& in) {
  const int c = in.get();
  if (c == std::char_traits<char>::eof()) truncated();
  return static_cast<std::uint8_t>(c);
}

std::uint64_t get_varint(std::istream& in) {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    const std::uint8_t b = get_byte(in);
    v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
    if (!(b & 0x80)) return v;
  }
  throw TrieFormatError(FormatErrorKind::kCorrupt, "varint overflow");
}

template <typename T>
T get_le(std::istream& in) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(get_byte(in)) << (8 * i);
  return v;
}

}  // namespace

KGTrie::KGTrie() : nodes_(1) {}

std::optional<KGTrie::NodeRef> KGTrie::step(NodeRef node, TokenId token) const {
  const auto& kids = nodes_.at(node).children;
  auto it = std::lower_bound(kids.begin(), kids.end(), token, token_less);
  if (it == kids.end() || it->token != token) return std::nullopt;
  return it->node;
}

std::optional<KGTrie::NodeRef> KGTrie::walk(std::span<const TokenId> prefix) const {
  NodeRef node = kRoot;
  for (TokenId t : prefix) {
    auto next = step(node, t);
    if (!next) return std::nullopt;
    node = *next;
  }
  return node;
}

std::span<const KGTrie::Child> KGTrie::children(NodeRef node) const { return nodes_.at(node).children; }

std::vector<TokenId> KGTrie::allowed_next(std::span<const TokenId> prefix) const {
  auto node = walk(prefix);
  if (!node) throw TrieError("allowed_next called on a prefix that is not in the trie");
  std::vector<TokenId> out;
  out.reserve(nodes_[*node].children.size());
  for (const Child& c : nodes_[*node].children) out.push_back(c.token);
  return out;
}

bool KGTrie::is_complete(std::span<const TokenId> prefix) const {
  auto node = walk(prefix);
  return node && nodes_[*node].terminal;
}

std::vector<TokenSequence> KGTrie::sequences() const {
  std::vector<TokenSequence> out;
  TokenSequence current;
  struct Frame {
    NodeRef node;
    std::size_t next;
  };
  std::vector<Frame> stack{{kRoot, 0}};
  if (nodes_[kRoot].terminal) out.push_back(current);
  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto& kids = nodes_[f.node].children;
    if (f.next == kids.size()) {
      stack.pop_back();
      if (!current.empty()) current.pop_back();
      continue;
    }
    const Child c = kids[f.next++];
    current.push_back(c.token);
    if (nodes_[c.node].terminal) out.push_back(current);
    stack.push_back(Frame{c.node, 0});
  }
  return out;
}

TrieBuilder::TrieBuilder(std::uint64_t vocab_fingerprint, std::uint32_t hops) {
  trie_.fingerprint_ = vocab_fingerprint;
  trie_.hops_ = hops;
}

KGTrie::NodeRef TrieBuilder::child_or_insert(KGTrie::NodeRef node, TokenId token) {
  auto& kids = trie_.nodes_[node].children;
  auto it = std::lower_bound(kids.begin(), kids.end(), token, token_less);
  if (it != kids.end() && it->token == token) return it->node;
  const auto fresh = static_cast<KGTrie::NodeRef>(trie_.nodes_.size());
  kids.insert(it, KGTrie::Child{token, fresh});
  // Invalidates `kids`.
  trie_.nodes_.emplace_back();
  return fresh;
}

bool TrieBuilder::insert(std::span<const TokenId> sequence) {
  if (sequence.empty()) throw TrieError("cannot insert an empty token sequence");
  KGTrie::NodeRef node = KGTrie::kRoot;
  for (TokenId t : sequence) node = child_or_insert(node, t);
  auto& n = trie_.nodes_[node];
  if (n.terminal) return false;
  n.terminal = true;
  ++trie_.n_paths_;
  return true;
}

void TrieBuilder::merge_node(const KGTrie& src, KGTrie::NodeRef src_node, KGTrie::NodeRef dst_node) {
  std::vector<std::pair<KGTrie::NodeRef, KGTrie::NodeRef>> stack{{src_node, dst_node}};
  while (!stack.empty()) {
    auto [s, d] = stack.back();
    stack.pop_back();
    if (src.nodes_[s].terminal && !trie_.nodes_[d].terminal) {
      trie_.nodes_[d].terminal = true;
      ++trie_.n_paths_;
    }
    for (const auto& c : src.nodes_[s].children) stack.emplace_back(c.node, child_or_insert(d, c.token));
  }
}

void TrieBuilder::merge(const KGTrie& other) {
  if (&other == &trie_) return;
  merge_node(other, KGTrie::kRoot, KGTrie::kRoot);
}

void TrieBuilder::merge(const TrieBuilder& other) { merge(other.trie_); }

KGTrie TrieBuilder::build() && { return std::move(trie_); }

KGTrie TrieBuilder::snapshot() const { return trie_; }

KGTrie build_trie(std::span<const TokenSequence> sequences, std::uint64_t vocab_fingerprint, std::uint32_t hops) {
  TrieBuilder b(vocab_fingerprint, hops);
  for (const auto& s : sequences) b.insert(s);
  return std::move(b).build();
}

KGTrie build_trie_parallel(std::span<const std::vector<TokenSequence>> partitions, std::uint64_t vocab_fingerprint,
                           std::uint32_t hops, unsigned jobs) {
  jobs = std::max(1U, jobs);
  std::vector<KGTrie> parts(partitions.size());
  for (std::size_t begin = 0; begin < partitions.size(); begin += jobs) {
    const std::size_t end = std::min(partitions.size(), begin + jobs);
    std::vector<std::future<void>> running;
    for (std::size_t i = begin; i < end; ++i) {
      running.push_back(std::async(std::launch::async, [&, i] {
        parts[i] = build_trie(partitions[i], vocab_fingerprint, hops);
      }));
    }
    for (auto& f : running) f.get();
  }
  TrieBuilder merged(vocab_fingerprint, hops);
  for (const auto& p : parts) merged.merge(p);
  return std::move(merged).build();
}

void serialize_trie(const KGTrie& trie, std::ostream& out) {
  out.write(kTrieMagic, sizeof(kTrieMagic));
  out.put(static_cast<char>(kTrieVersion));
  put_le<std::uint64_t>(out, trie.vocab_fingerprint());
  put_le<std::uint32_t>(out, trie.hops());
  put_le<std::uint64_t>(out, trie.n_paths());

  struct Frame {
    KGTrie::NodeRef node;
    std::size_t next;
  };
  std::vector<Frame> stack{{KGTrie::kRoot, 0}};
  put_varint(out, trie.children(KGTrie::kRoot).size());
  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto kids = trie.children(f.node);
    if (f.next == kids.size()) {
      out.put(trie.terminal(f.node) ? 1 : 0);
      stack.pop_back();
      continue;
    }
    const auto c = kids[f.next++];
    put_varint(out, c.token);
    put_varint(out, trie.children(c.node).size());
    stack.push_back(Frame{c.node, 0});
  }
}

std::string serialize_trie(const KGTrie& trie) {
  std::ostringstream out(std::ios::binary);
  serialize_trie(trie, out);
  return std::move(out).str();
}

KGTrie deserialize_trie(std::istream& in) {
  char magic[4] = {};
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || std::memcmp(magic, kTrieMagic, sizeof(magic)) != 0) {
    throw TrieFormatError(FormatErrorKind::kBadMagic, "not a trie file (bad magic)");
  }
  const std::uint8_t version = get_byte(in);
  if (version != kTrieVersion) {
    throw TrieFormatError(FormatErrorKind::kVersionMismatch,
                          "unsupported trie format version " + std::to_string(version));
  }
  KGTrie trie;
  trie.fingerprint_ = get_le<std::uint64_t>(in);
  trie.hops_ = get_le<std::uint32_t>(in);
  const auto declared_paths = get_le<std::uint64_t>(in);

  struct Frame {
    KGTrie::NodeRef node;
    std::uint64_t remaining;
  };
  std::vector<Frame> stack{{KGTrie::kRoot, get_varint(in)}};
  std::uint64_t terminals = 0;
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.remaining == 0) {
      const std::uint8_t flag = get_byte(in);
      if (flag > 1) throw TrieFormatError(FormatErrorKind::kCorrupt, "bad terminal flag");
      auto& node = trie.nodes_[f.node];
      node.terminal = flag == 1;
      if (!node.terminal && node.children.empty() && f.node != KGTrie::kRoot) {
        throw TrieFormatError(FormatErrorKind::kCorrupt, "dead-end node in trie stream");
      }
      terminals += flag;
      stack.pop_back();
      continue;
    }
    --f.remaining;
    const std::uint64_t token = get_varint(in);
    if (token > UINT32_MAX) throw TrieFormatError(FormatErrorKind::kCorrupt, "token id overflow");
    const KGTrie::NodeRef parent = f.node;
    auto& siblings = trie.nodes_[parent].children;
    if (!siblings.empty() && siblings.back().token >= token) {
      throw TrieFormatError(FormatErrorKind::kCorrupt, "children not strictly ordered");
    }
    const auto child = static_cast<KGTrie::NodeRef>(trie.nodes_.size());
    siblings.push_back(KGTrie::Child{static_cast<TokenId>(token), child});
    trie.nodes_.emplace_back();
    const std::uint64_t count = get_varint(in);
    stack.push_back(Frame{child, count});
  }
  if (terminals != declared_paths) {
    throw TrieFormatError(FormatErrorKind::kCorrupt, "path count does not match terminal nodes");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw TrieFormatError(FormatErrorKind::kCorrupt, "trailing bytes after trie stream");
  }
  trie.n_paths_ = terminals;
  return trie;
}

KGTrie deserialize_trie(std::string_view bytes) {
  std::istringstream in(std::string(bytes), std::ios::binary);
  return deserialize_trie(in);
}

void save_trie_file(const KGTrie& trie, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write trie file: " + path.string());
  serialize_trie(trie, out);
  if (!out) throw Error("failed writing trie file: " + path.string());
}

KGTrie load_trie_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open trie file: " + path.string());
  return deserialize_trie(in);
}

std::optional<std::string> fingerprint_warning(const KGTrie& trie, std::uint64_t runtime_fingerprint) {
  if (trie.vocab_fingerprint() == runtime_fingerprint) return std::nullopt;
  return "trie was built for vocabulary " + fingerprint_hex(trie.vocab_fingerprint()) +
         " but the runtime vocabulary is " + fingerprint_hex(runtime_fingerprint);
}

}  // namespace gcr
