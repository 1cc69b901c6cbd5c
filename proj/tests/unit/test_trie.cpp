#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gcr/errors.hpp"
#include "gcr/index.hpp"
#include "gcr/trie.hpp"
#include "support/fixtures.hpp"

using namespace gcr;
using gcr::testing::PrefixOracle;

namespace {

struct T1Trie {
  KnowledgeGraph kg = gcr::testing::t1_graph();
  Vocab vocab = reference_vocab(kg);
  std::vector<TokenSequence> sequences;
  KGTrie trie;

  T1Trie() {
    const std::vector<std::string> a{"A"};
    sequences = tokenize_paths(kg, enumerate_paths(kg, a, 2), vocab).sequences;
    trie = build_trie(sequences, vocab.fingerprint(), 2);
  }

  TokenSequence enc(const std::string& s) const { return vocab.encode(s); }
  TokenId id(const std::string& s) const { return *vocab.find(s); }
};

const std::string kArrowText = "\xE2\x86\x92";

void check_against_oracle(const KGTrie& trie, const PrefixOracle& oracle) {
  for (const auto& p : oracle.all_prefixes()) {
    REQUIRE(trie.is_valid_prefix(p));
    CHECK(trie.allowed_next(p) == oracle.allowed(p));
    CHECK(trie.is_complete(p) == oracle.complete(p));
    if (!oracle.complete(p)) CHECK_FALSE(trie.allowed_next(p).empty());
  }
}

}  // namespace

TEST_SUITE("trie") {
  TEST_CASE("toy trie structure") {
    T1Trie t;
    CHECK(t.trie.n_paths() == 5);
    const auto root = t.trie.children(KGTrie::kRoot);
    REQUIRE(root.size() == 1);
    CHECK(root[0].token == special::kPathOpen);

    const TokenSequence single{special::kPathOpen, t.id("A"), special::kPathClose};
    const std::vector<TokenSequence> one{single};
    const auto chain = build_trie(one);
    CHECK(chain.n_nodes() == 4);  // root plus three token nodes
    CHECK(chain.n_paths() == 1);

    TrieBuilder b;
    CHECK(b.insert(single));
    CHECK_FALSE(b.insert(single));
    CHECK(b.size() == 1);
    CHECK_THROWS_AS(b.insert(TokenSequence{}), Error);
  }

  TEST_CASE("prefix queries on the toy trie") {
    T1Trie t;
    CHECK(t.trie.is_valid_prefix(TokenSequence{}));
    CHECK_FALSE(t.trie.is_valid_prefix(t.enc("<PATH> A " + kArrowText + " r2")));
    CHECK(t.trie.is_valid_prefix(t.enc("<PATH> A " + kArrowText + " r1")));

    CHECK(t.trie.allowed_next(t.enc("<PATH> A " + kArrowText)) == std::vector<TokenId>{t.id("r1"), t.id("r3")});
    CHECK(t.trie.allowed_next(t.enc("<PATH>")) == std::vector<TokenId>{t.id("A")});
    auto at_b = std::vector<TokenId>{t.id(kArrowText), special::kPathClose};
    std::sort(at_b.begin(), at_b.end());
    CHECK(t.trie.allowed_next(t.enc("<PATH> A " + kArrowText + " r1 " + kArrowText + " B")) == at_b);
    CHECK_THROWS_AS(t.trie.allowed_next(t.enc("<PATH> B")), TrieError);

    const auto full = t.enc("<PATH> A " + kArrowText + " r1 " + kArrowText + " B </PATH>");
    CHECK(t.trie.is_complete(full));
    CHECK_FALSE(t.trie.is_complete(TokenSequence(full.begin(), full.end() - 1)));
    CHECK_FALSE(t.trie.is_complete(TokenSequence{}));
  }

  TEST_CASE("insertion order does not matter") {
    T1Trie t;
    auto shuffled = t.sequences;
    std::mt19937 rng(3);
    for (int i = 0; i < 5; ++i) {
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto other = build_trie(shuffled, t.vocab.fingerprint(), 2);
      CHECK(serialize_trie(other) == serialize_trie(t.trie));
    }
  }

  TEST_CASE("random tries agree with the prefix-filter oracle") {
    std::mt19937_64 rng(42);
    for (int round = 0; round < 20; ++round) {
      PrefixOracle oracle;
      std::uniform_int_distribution<int> len(1, 6), tok(0, 5);
      for (int i = 0; i < 60; ++i) {
        TokenSequence s(static_cast<std::size_t>(len(rng)));
        for (auto& x : s) x = static_cast<TokenId>(tok(rng));
        oracle.sequences.insert(s);
      }
      const std::vector<TokenSequence> seqs(oracle.sequences.begin(), oracle.sequences.end());
      const auto trie = build_trie(seqs);
      CHECK(trie.n_paths() == oracle.sequences.size());
      check_against_oracle(trie, oracle);
      const auto stored = trie.sequences();
      CHECK(std::set<TokenSequence>(stored.begin(), stored.end()) == oracle.sequences);
    }
  }

  TEST_CASE("merge is a set union") {
    std::vector<TokenSequence> left{{0, 1, 2}, {0, 1}, {3}};
    std::vector<TokenSequence> right{{0, 1, 2}, {0, 4}, {5, 6}};
    TrieBuilder a, b, c;
    for (const auto& s : left) a.insert(s);
    for (const auto& s : right) b.insert(s);
    c.insert(TokenSequence{7});
    TrieBuilder ab = a;
    ab.merge(b);
    ab.merge(c);
    TrieBuilder bc = b;
    bc.merge(c);
    TrieBuilder a_bc = a;
    a_bc.merge(bc);
    CHECK(ab.size() == 6);
    CHECK(serialize_trie(ab.snapshot()) == serialize_trie(a_bc.snapshot()));
    TrieBuilder ba = b;
    ba.merge(a);
    ba.merge(c);
    CHECK(serialize_trie(ba.snapshot()) == serialize_trie(ab.snapshot()));
    ab.merge(ab);
    CHECK(ab.size() == 6);
  }

  TEST_CASE("parallel build equals sequential build") {
    std::mt19937_64 rng(5);
    const auto kg = gcr::testing::random_graph(rng, {30, 4, 90});
    const auto vocab = reference_vocab(kg);
    std::vector<std::vector<TokenSequence>> parts;
    std::vector<TokenSequence> all;
    for (int e = 0; e < 8; ++e) {
      const std::vector<std::string> start{"e" + std::to_string(e)};
      parts.push_back(tokenize_paths(kg, enumerate_paths(kg, start, 2), vocab).sequences);
      all.insert(all.end(), parts.back().begin(), parts.back().end());
    }
    const auto seq = build_trie(all, vocab.fingerprint(), 2);
    for (unsigned jobs : {1u, 2u, 4u}) {
      CHECK(serialize_trie(build_trie_parallel(parts, vocab.fingerprint(), 2, jobs)) == serialize_trie(seq));
    }
  }

  TEST_CASE("serialization round trip") {
    T1Trie t;
    const auto bytes = serialize_trie(t.trie);
    CHECK(bytes.substr(0, 4) == "GCRT");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    const auto back = deserialize_trie(bytes);
    CHECK(back.n_paths() == 5);
    CHECK(back.hops() == 2);
    CHECK(back.vocab_fingerprint() == t.vocab.fingerprint());
    PrefixOracle oracle{{t.sequences.begin(), t.sequences.end()}};
    check_against_oracle(back, oracle);

    const KGTrie empty_trie;
    CHECK(deserialize_trie(serialize_trie(empty_trie)).empty());
  }

  TEST_CASE("header fields are little-endian") {
    TrieBuilder b(0x0102030405060708ULL, 3);
    b.insert(TokenSequence{0, 300, 1});
    const auto bytes = serialize_trie(std::move(b).build());
    CHECK(static_cast<unsigned char>(bytes[5]) == 0x08);
    CHECK(static_cast<unsigned char>(bytes[12]) == 0x01);
    CHECK(static_cast<unsigned char>(bytes[13]) == 3);
    CHECK(static_cast<unsigned char>(bytes[17]) == 1);
  }

  TEST_CASE("deserialization errors are distinct") {
    T1Trie t;
    const auto bytes = serialize_trie(t.trie);
    auto kind_of = [](const std::string& data) {
      try {
        deserialize_trie(data);
      } catch (const TrieFormatError& e) {
        return e.kind();
      }
      FAIL("expected TrieFormatError");
      return FormatErrorKind::kCorrupt;
    };
    CHECK(kind_of("") == FormatErrorKind::kBadMagic);
    CHECK(kind_of("GCRX" + bytes.substr(4)) == FormatErrorKind::kBadMagic);
    auto wrong_version = bytes;
    wrong_version[4] = 2;
    CHECK(kind_of(wrong_version) == FormatErrorKind::kVersionMismatch);
    CHECK(kind_of(bytes.substr(0, 10)) == FormatErrorKind::kTruncated);
    CHECK(kind_of(bytes.substr(0, bytes.size() - 1)) == FormatErrorKind::kTruncated);
    CHECK(kind_of(bytes + "x") == FormatErrorKind::kCorrupt);
    auto wrong_count = bytes;
    wrong_count[17] = 9;
    CHECK(kind_of(wrong_count) == FormatErrorKind::kCorrupt);
  }

  TEST_CASE("fingerprint mismatch is reported") {
    T1Trie t;
    CHECK_FALSE(fingerprint_warning(t.trie, t.vocab.fingerprint()).has_value());
    CHECK(fingerprint_warning(t.trie, t.vocab.fingerprint() + 1).has_value());
  }

  TEST_CASE("file round trip") {
    T1Trie t;
    const auto path = std::filesystem::temp_directory_path() / "gcr_unit_t1.trie";
    save_trie_file(t.trie, path);
    const auto back = load_trie_file(path);
    CHECK(serialize_trie(back) == serialize_trie(t.trie));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_trie_file(path), Error);
  }
}
