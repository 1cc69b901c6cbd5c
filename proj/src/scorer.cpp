#include "gcr/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gcr/errors.hpp"

namespace gcr {

TableScorer::TableScorer(std::size_t vocab_size, std::uint64_t vocab_fingerprint, std::vector<Row> rows,
                         double unlisted_logprob)
    : vocab_size_(vocab_size), fingerprint_(vocab_fingerprint), unlisted_logprob_(unlisted_logprob) {
  if (!std::isfinite(unlisted_logprob_) || unlisted_logprob_ > 0) {
    throw ConfigError("unlisted_logprob must be finite and <= 0");
  }
  for (auto& row : rows) {
    if (row.probabilities.empty()) throw ConfigError("table scorer row has an empty distribution");
    double total = 0;
    for (const auto& [tok, p] : row.probabilities) {
      if (tok >= vocab_size_) throw ConfigError("table scorer row names token id " + std::to_string(tok));
      if (!(p > 0 && p <= 1)) throw ConfigError("table scorer probabilities must lie in (0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw ConfigError("table scorer row does not normalize (sum " + std::to_string(total) + ")");
    }
    longest_suffix_ = std::max(longest_suffix_, row.context_suffix.size());
    auto key = row.context_suffix;
    rows_.insert_or_assign(std::move(key), std::move(row));
  }
}

const TableScorer::Row* TableScorer::match(std::span<const TokenId> context) const {
  if (rows_.empty()) return nullptr;
  TokenSequence suffix;
  for (std::size_t len = std::min(longest_suffix_, context.size()) + 1; len-- > 0;) {
    suffix.assign(context.end() - static_cast<std::ptrdiff_t>(len), context.end());
    if (auto it = rows_.find(suffix); it != rows_.end()) return &it->second;
  }
  return nullptr;
}

std::vector<double> TableScorer::score_candidates(std::span<const TokenId> context,
                                                  std::span<const TokenId> candidates) const {
  std::vector<double> out(candidates.size());
  const Row* row = match(context);
  if (!row) {
    std::fill(out.begin(), out.end(), -std::log(static_cast<double>(candidates.size())));
    return out;
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto it = row->probabilities.find(candidates[i]);
    out[i] = it == row->probabilities.end() ? unlisted_logprob_ : std::log(it->second);
  }
  return out;
}

std::vector<ScoredToken> TableScorer::top_tokens(std::span<const TokenId> context, std::size_t n) const {
  n = std::min(n, vocab_size_);
  std::vector<ScoredToken> out;
  out.reserve(n);
  const Row* row = match(context);
  if (!row) {
    const double lp = -std::log(static_cast<double>(vocab_size_));
    for (TokenId t = 0; t < n; ++t) out.push_back({t, lp});
    return out;
  }
  for (const auto& [tok, p] : row->probabilities) out.push_back({tok, std::log(p)});
  std::stable_sort(out.begin(), out.end(), [](const ScoredToken& a, const ScoredToken& b) {
    return a.logprob > b.logprob;
  });
  if (out.size() > n) out.resize(n);
  for (TokenId t = 0; out.size() < n && t < vocab_size_; ++t) {
    if (!row->probabilities.contains(t)) out.push_back({t, unlisted_logprob_});
  }
  return out;
}

TableScorer make_table_scorer(const Vocab& vocab, std::vector<TableScorer::Row> rows, double unlisted_logprob) {
  return TableScorer(vocab.size(), vocab.fingerprint(), std::move(rows), unlisted_logprob);
}

TableScorer load_table_scorer(const std::filesystem::path& path, const Vocab& vocab) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scorer table: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scorer table is not valid JSON: " + std::string(e.what()));
  }
  std::vector<TableScorer::Row> rows;
  try {
    for (const auto& r : j.value("rows", nlohmann::json::array())) {
      TableScorer::Row row;
      row.context_suffix = vocab.encode(r.at("context").get<std::string>());
      for (auto it = r.at("dist").begin(); it != r.at("dist").end(); ++it) {
        auto tok = vocab.find(it.key());
        if (!tok) throw ConfigError("scorer table token '" + it.key() + "' is not in the vocabulary");
        row.probabilities[*tok] = it.value().get<double>();
      }
      rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed scorer table: " + std::string(e.what()));
  }
  return make_table_scorer(vocab, std::move(rows), j.value("unlisted_logprob", TableScorer::kDefaultUnlistedLogprob));
}

}  // namespace gcr
