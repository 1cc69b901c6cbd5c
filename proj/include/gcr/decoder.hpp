#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gcr/codec.hpp"
#include "gcr/scorer.hpp"
#include "gcr/trie.hpp"

namespace gcr {

struct DecodeConfig {
  std::size_t beam_width = 10;
  // 0 disables the answer segment: beams finish as soon as their path closes.
  std::size_t max_answer_tokens = 64;
  std::string path_header{kPathHeader};
  std::string answer_header{kAnswerHeader};
  // Rank by score / scored-token count instead of the raw sum.
  bool length_normalization = false;
  // false decodes the path segment freely from top_tokens (ablation only).
  bool constrained = true;
  // Path-segment cap for unconstrained decoding; constrained paths end at trie leaves.
  std::size_t max_path_tokens = 256;
  bool record_trace = false;
};

struct DecodeResult {
  std::string path_text;
  std::string answer_text;
  double log_score = 0;
  std::size_t path_tokens = 0;
  std::size_t answer_tokens = 0;

  // Generated tokens after the prompt, including forced headers, with the
  // log-probability of each (0 for forced tokens).
  TokenSequence tokens;
  std::vector<double> token_logprobs;
  // Cumulative score after each decoding step.
  std::vector<double> step_scores;
};

struct DecodeOutput {
  std::vector<DecodeResult> results;  // <= beam_width, best first
  // Per step, the ranking key of the worst hypothesis kept (record_trace only).
  std::vector<double> step_cutoffs;
  std::size_t steps = 0;
  std::size_t scorer_calls = 0;
  std::size_t context_tokens = 0;  // prompt length
};

// Graph-constrained beam search. Each hypothesis moves through three phases:
// path (tokens restricted to trie children), answer (free decoding until EOS
// or max_answer_tokens) and done. Ties on score are broken by the
// lexicographically smaller token sequence. Throws ConfigError if the scorer
// and trie disagree on the vocabulary and DecodeError if the scorer fails.
DecodeOutput decode(const Scorer& scorer, const Vocab& vocab, std::span<const TokenId> prompt, const KGTrie& trie,
                    const DecodeConfig& config = {});

inline std::vector<DecodeResult> constrained_beam_search(const Scorer& scorer, const Vocab& vocab,
                                                         std::span<const TokenId> prompt, const KGTrie& trie,
                                                         const DecodeConfig& config = {}) {
  return decode(scorer, vocab, prompt, trie, config).results;
}

}  // namespace gcr
