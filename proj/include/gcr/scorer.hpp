#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "gcr/codec.hpp"

namespace gcr {

struct ScoredToken {
  TokenId token;
  double logprob;
};

// Next-token log-probability source. Implementations must tolerate concurrent
// calls from several decoder invocations.
class Scorer {
 public:
  virtual ~Scorer() = default;

  // One finite log-probability <= 0 per candidate, positionally aligned.
  virtual std::vector<double> score_candidates(std::span<const TokenId> context,
                                               std::span<const TokenId> candidates) const = 0;
  // Up to n tokens in descending log-probability order (ties: lower id first).
  virtual std::vector<ScoredToken> top_tokens(std::span<const TokenId> context, std::size_t n) const = 0;
  virtual std::uint64_t vocab_fingerprint() const = 0;
};

// Deterministic test double. Each row maps a context suffix to a distribution
// over tokens; the longest matching suffix wins. Contexts with no matching row
// are uniform over the requested candidates (or the whole vocabulary for
// top_tokens). Tokens outside a matching row's support get `unlisted_logprob`.
class TableScorer final : public Scorer {
 public:
  struct Row {
    TokenSequence context_suffix;
    std::map<TokenId, double> probabilities;
  };

  static constexpr double kDefaultUnlistedLogprob = -30.0;

  // Throws ConfigError if a row's probabilities are not in (0, 1] or do not sum to 1.
  TableScorer(std::size_t vocab_size, std::uint64_t vocab_fingerprint, std::vector<Row> rows = {},
              double unlisted_logprob = kDefaultUnlistedLogprob);

  std::vector<double> score_candidates(std::span<const TokenId> context,
                                       std::span<const TokenId> candidates) const override;
  std::vector<ScoredToken> top_tokens(std::span<const TokenId> context, std::size_t n) const override;
  std::uint64_t vocab_fingerprint() const override { return fingerprint_; }

 private:
  const Row* match(std::span<const TokenId> context) const;

  std::size_t vocab_size_;
  std::uint64_t fingerprint_;
  std::map<TokenSequence, Row> rows_;
  std::size_t longest_suffix_ = 0;
  double unlisted_logprob_;
};

TableScorer make_table_scorer(const Vocab& vocab, std::vector<TableScorer::Row> rows = {},
                              double unlisted_logprob = TableScorer::kDefaultUnlistedLogprob);

// JSON form:
//   {"unlisted_logprob": -30,
//    "rows": [{"context": "<PATH> A →", "dist": {"r3": 0.9, "r1": 0.1}}]}
// Contexts are encoded with `vocab`; distribution keys must be vocabulary tokens.
TableScorer load_table_scorer(const std::filesystem::path& path, const Vocab& vocab);

}  // namespace gcr
