#pragma once

// Fixtures and brute-force oracles shared by the unit and acceptance suites.
// The oracles only use the public KnowledgeGraph accessors and plain
// containers, never the code paths they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gcr/codec.hpp"
#include "gcr/kg.hpp"
#include "gcr/scorer.hpp"
#include "gcr/trie.hpp"

namespace gcr::testing {

inline KnowledgeGraph t1_graph() {
  KnowledgeGraph kg;
  kg.add_triple("A", "r1", "B");
  kg.add_triple("B", "r2", "C");
  kg.add_triple("A", "r3", "D");
  kg.add_triple("D", "r2", "C");
  kg.add_triple("B", "r2", "E");
  return kg;
}

// Paths as plain name lists: {e0, r1, e1, ...}.
using NamedPath = std::vector<std::string>;

inline NamedPath to_named(const KnowledgeGraph& kg, const ReasoningPath& p) {
  NamedPath out{kg.entity_name(p.start)};
  for (const auto& s : p.steps) {
    out.push_back(kg.relation_name(s.relation));
    out.push_back(kg.entity_name(s.entity));
  }
  return out;
}

inline std::set<NamedPath> to_named_set(const KnowledgeGraph& kg, const std::vector<ReasoningPath>& paths) {
  std::set<NamedPath> out;
  for (const auto& p : paths) out.insert(to_named(kg, p));
  return out;
}

// Recursive DFS over the raw triple list.
inline void dfs_paths(const std::vector<std::tuple<std::string, std::string, std::string>>& triples,
                      NamedPath& current, int remaining, std::set<NamedPath>& out) {
  if (remaining == 0) return;
  for (const auto& [h, r, t] : triples) {
    if (h != current.back()) continue;
    current.push_back(r);
    current.push_back(t);
    out.insert(current);
    dfs_paths(triples, current, remaining - 1, out);
    current.pop_back();
    current.pop_back();
  }
}

inline std::set<NamedPath> brute_force_paths(const KnowledgeGraph& kg, const std::vector<std::string>& starts,
                                             int max_hops) {
  std::vector<std::tuple<std::string, std::string, std::string>> triples;
  for (const auto& t : kg.triples()) {
    triples.emplace_back(kg.entity_name(t.head), kg.relation_name(t.relation), kg.entity_name(t.tail));
  }
  std::set<NamedPath> out;
  for (const auto& s : starts) {
    NamedPath current{s};
    dfs_paths(triples, current, max_hops, out);
  }
  return out;
}

inline std::string named_path_text(const NamedPath& p) {
  std::string out = "<PATH> " + p.front();
  for (std::size_t i = 1; i < p.size(); ++i) out += " \xE2\x86\x92 " + p[i];
  return out + " </PATH>";
}

struct RandomGraphSpec {
  int entities = 20;
  int relations = 4;
  int triples = 60;
};

inline KnowledgeGraph random_graph(std::mt19937_64& rng, const RandomGraphSpec& shape) {
  KnowledgeGraph kg;
  std::uniform_int_distribution<int> ent(0, shape.entities - 1), rel(0, shape.relations - 1);
  for (int i = 0; i < shape.entities; ++i) kg.intern_entity("e" + std::to_string(i));
  for (int i = 0; i < shape.triples; ++i) {
    kg.add_triple("e" + std::to_string(ent(rng)), "r" + std::to_string(rel(rng)), "e" + std::to_string(ent(rng)));
  }
  return kg;
}

// Prefix-filter oracle over an explicit set of sequences.
struct PrefixOracle {
  std::set<TokenSequence> sequences;

  static bool starts_with(const TokenSequence& s, const TokenSequence& p) {
    return s.size() >= p.size() && std::equal(p.begin(), p.end(), s.begin());
  }
  bool valid(const TokenSequence& p) const {
    return std::any_of(sequences.begin(), sequences.end(), [&](const auto& s) { return starts_with(s, p); });
  }
  bool complete(const TokenSequence& p) const { return sequences.contains(p); }
  std::vector<TokenId> allowed(const TokenSequence& p) const {
    std::set<TokenId> next;
    for (const auto& s : sequences) {
      if (s.size() > p.size() && starts_with(s, p)) next.insert(s[p.size()]);
    }
    return {next.begin(), next.end()};
  }
  std::set<TokenSequence> all_prefixes() const {
    std::set<TokenSequence> out;
    for (const auto& s : sequences) {
      for (std::size_t n = 0; n <= s.size(); ++n) out.emplace(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
    }
    return out;
  }
};

// Exhaustive path score under a scorer: every position is scored against the
// full set of next tokens the stored sequences allow after that prefix.
inline double exhaustive_path_score(const Scorer& scorer, const PrefixOracle& oracle, const TokenSequence& context,
                                    const TokenSequence& sequence, std::size_t skip) {
  double total = 0;
  for (std::size_t i = skip; i < sequence.size(); ++i) {
    const TokenSequence prefix(sequence.begin(), sequence.begin() + static_cast<std::ptrdiff_t>(i));
    const auto allowed = oracle.allowed(prefix);
    TokenSequence ctx = context;
    ctx.insert(ctx.end(), prefix.begin(), prefix.end());
    const auto lps = scorer.score_candidates(ctx, allowed);
    const auto at = std::find(allowed.begin(), allowed.end(), sequence[i]) - allowed.begin();
    total += lps[static_cast<std::size_t>(at)];
  }
  return total;
}

inline std::string t1_tsv() {
  return "A\tr1\tB\nB\tr2\tC\nA\tr3\tD\nD\tr2\tC\nB\tr2\tE\n";
}

}  // namespace gcr::testing
