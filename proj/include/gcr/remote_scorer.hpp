#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>

#include "gcr/http.hpp"
#include "gcr/scorer.hpp"

namespace gcr {

// Scorer backed by a model server speaking
//   POST /v1/score {"context": [...], "candidates": [...]} -> {"logprobs": [...]}
//   POST /v1/top   {"context": [...], "n": k}              -> {"tokens": [...], "logprobs": [...]}
//   GET  /v1/vocab                                          -> {"fingerprint": "hex", "size": n}
class RemoteScorer final : public Scorer {
 public:
  explicit RemoteScorer(HttpOptions options);

  std::vector<double> score_candidates(std::span<const TokenId> context,
                                       std::span<const TokenId> candidates) const override;
  std::vector<ScoredToken> top_tokens(std::span<const TokenId> context, std::size_t n) const override;
  // Fetched from /v1/vocab on first use and cached.
  std::uint64_t vocab_fingerprint() const override;
  std::size_t vocab_size() const;

  std::uint64_t calls() const noexcept { return calls_.load(); }
  std::uint64_t retries() const noexcept { return http_.retries(); }
  // Context plus candidate tokens sent across all calls.
  std::uint64_t tokens_sent() const noexcept { return tokens_sent_.load(); }

 private:
  void fetch_vocab() const;

  JsonHttpClient http_;
  mutable std::once_flag vocab_once_;
  mutable std::uint64_t fingerprint_ = 0;
  mutable std::size_t vocab_size_ = 0;
  mutable std::atomic<std::uint64_t> calls_{0};
  mutable std::atomic<std::uint64_t> tokens_sent_{0};
};

std::unique_ptr<RemoteScorer> make_remote_scorer(const std::string& endpoint,
                                                 std::optional<std::string> auth = std::nullopt,
                                                 std::chrono::milliseconds timeout = std::chrono::seconds(30),
                                                 int retries = 3);

}  // namespace gcr
