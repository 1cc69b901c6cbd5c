#include "gcr/remote_scorer.hpp"

#include <cmath>

#include "gcr/errors.hpp"

namespace gcr {

namespace {

[[noreturn]] void protocol_error(const std::string& endpoint, const std::string& what) {
  throw TransportError(TransportErrorKind::kProtocol, endpoint + ": " + what);
}

std::vector<double> read_logprobs(const nlohmann::json& j, std::size_t expected, const std::string& endpoint) {
  if (!j.is_object() || !j.contains("logprobs") || !j["logprobs"].is_array()) {
    protocol_error(endpoint, "response lacks a 'logprobs' array");
  }
  const auto& arr = j["logprobs"];
  if (arr.size() != expected) {
    protocol_error(endpoint, "expected " + std::to_string(expected) + " logprobs, got " + std::to_string(arr.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : arr) {
    if (!v.is_number()) protocol_error(endpoint, "non-numeric logprob");
    const double lp = v.get<double>();
    if (!std::isfinite(lp) || lp > 1e-9) protocol_error(endpoint, "logprob is not finite and <= 0");
    out.push_back(std::min(lp, 0.0));
  }
  return out;
}

}  // namespace

RemoteScorer::RemoteScorer(HttpOptions options) : http_(std::move(options)) {}

std::vector<double> RemoteScorer::score_candidates(std::span<const TokenId> context,
                                                   std::span<const TokenId> candidates) const {
  nlohmann::json body{{"context", std::vector<TokenId>(context.begin(), context.end())},
                      {"candidates", std::vector<TokenId>(candidates.begin(), candidates.end())}};
  ++calls_;
  tokens_sent_ += context.size() + candidates.size();
  return read_logprobs(http_.post("/v1/score", body), candidates.size(), http_.endpoint());
}

std::vector<ScoredToken> RemoteScorer::top_tokens(std::span<const TokenId> context, std::size_t n) const {
  nlohmann::json body{{"context", std::vector<TokenId>(context.begin(), context.end())}, {"n", n}};
  ++calls_;
  tokens_sent_ += context.size();
  const auto j = http_.post("/v1/top", body);
  if (!j.is_object() || !j.contains("tokens") || !j["tokens"].is_array()) {
    protocol_error(http_.endpoint(), "response lacks a 'tokens' array");
  }
  const auto& toks = j["tokens"];
  if (toks.size() > n) protocol_error(http_.endpoint(), "more tokens returned than requested");
  const auto lps = read_logprobs(j, toks.size(), http_.endpoint());
  std::vector<ScoredToken> out;
  out.reserve(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!toks[i].is_number_unsigned()) protocol_error(http_.endpoint(), "token ids must be unsigned integers");
    if (i > 0 && lps[i] > lps[i - 1]) protocol_error(http_.endpoint(), "top tokens are not score-descending");
    out.push_back({toks[i].get<TokenId>(), lps[i]});
  }
  return out;
}

void RemoteScorer::fetch_vocab() const {
  std::call_once(vocab_once_, [this] {
    const auto j = http_.get("/v1/vocab");
    try {
      fingerprint_ = std::stoull(j.at("fingerprint").get<std::string>(), nullptr, 16);
      vocab_size_ = j.at("size").get<std::size_t>();
    } catch (const std::exception& e) {
      protocol_error(http_.endpoint(), std::string("malformed /v1/vocab response: ") + e.what());
    }
  });
}

std::uint64_t RemoteScorer::vocab_fingerprint() const {
  fetch_vocab();
  return fingerprint_;
}

std::size_t RemoteScorer::vocab_size() const {
  fetch_vocab();
  return vocab_size_;
}

std::unique_ptr<RemoteScorer> make_remote_scorer(const std::string& endpoint, std::optional<std::string> auth,
                                                 std::chrono::milliseconds timeout, int retries) {
  HttpOptions opts;
  opts.endpoint = endpoint;
  opts.bearer = std::move(auth);
  opts.timeout = timeout;
  opts.retries = retries;
  return std::make_unique<RemoteScorer>(std::move(opts));
}

}  // namespace gcr
