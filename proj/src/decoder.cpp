#include "gcr/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "gcr/errors.hpp"

namespace gcr {

namespace {

enum class Phase { kPath, kAnswer, kDone };

struct Beam {
  TokenSequence tokens;
  std::vector<double> logprobs;
  std::vector<double> step_scores;
  double score = 0;
  std::size_t scored = 0;
  Phase phase = Phase::kPath;
  KGTrie::NodeRef node = KGTrie::kRoot;
  std::size_t path_begin = 0;
  std::size_t path_end = 0;
  std::size_t answer_begin = 0;
  std::size_t answer_count = 0;
};

// What happens to a hypothesis once the candidate token is appended.
enum class Action { kClose, kExtend, kFinish };

struct Candidate {
  std::size_t parent;
  TokenId token;
  double logprob;
  double score;
  double key;
  Action action;
  KGTrie::NodeRef node;
};

class Search {
 public:
  Search(const Scorer& scorer, const Vocab& vocab, std::span<const TokenId> prompt, const KGTrie& trie,
         const DecodeConfig& config)
      : scorer_(scorer), vocab_(vocab), prompt_(prompt), trie_(trie), config_(config) {
    answer_header_ = vocab_.encode(config_.answer_header);
  }

  DecodeOutput run() {
    DecodeOutput out;
    out.context_tokens = prompt_.size();
    if (config_.constrained && trie_.empty()) return out;

    std::vector<Beam> live{initial_beam()};
    std::vector<Beam> finished;
    while (!live.empty()) {
      auto candidates = expand(live);
      ++out.steps;
      std::sort(candidates.begin(), candidates.end(),
                [&](const Candidate& a, const Candidate& b) { return better(a, b, live); });
      if (candidates.size() > config_.beam_width) candidates.resize(config_.beam_width);
      if (config_.record_trace && !candidates.empty()) out.step_cutoffs.push_back(candidates.back().key);

      std::vector<Beam> next;
      for (const Candidate& c : candidates) {
        Beam b = apply(live[c.parent], c);
        (b.phase == Phase::kDone ? finished : next).push_back(std::move(b));
      }
      live = std::move(next);
      if (can_stop(live, finished)) break;
    }
    out.scorer_calls = scorer_calls_;

    std::sort(finished.begin(), finished.end(), [&](const Beam& a, const Beam& b) {
      const double ka = key(a.score, a.scored), kb = key(b.score, b.scored);
      if (ka != kb) return ka > kb;
      return a.tokens < b.tokens;
    });
    std::set<std::pair<std::string, std::string>> seen;
    for (const Beam& b : finished) {
      if (out.results.size() == config_.beam_width) break;
      DecodeResult r = to_result(b);
      if (!seen.emplace(r.path_text, r.answer_text).second) continue;
      out.results.push_back(std::move(r));
    }
    return out;
  }

 private:
  double key(double score, std::size_t scored) const {
    return config_.length_normalization ? score / static_cast<double>(std::max<std::size_t>(1, scored)) : score;
  }

  bool better(const Candidate& a, const Candidate& b, const std::vector<Beam>& live) const {
    if (a.key != b.key) return a.key > b.key;
    const auto& ta = live[a.parent].tokens;
    const auto& tb = live[b.parent].tokens;
    // Lexicographic comparison of (parent tokens ++ token) without materializing.
    const std::size_t la = ta.size() + 1, lb = tb.size() + 1;
    for (std::size_t i = 0; i < std::min(la, lb); ++i) {
      const TokenId xa = i < ta.size() ? ta[i] : a.token;
      const TokenId xb = i < tb.size() ? tb[i] : b.token;
      if (xa != xb) return xa < xb;
    }
    if (la != lb) return la < lb;
    return a.action < b.action;
  }

  Beam initial_beam() const {
    Beam b;
    b.tokens = vocab_.encode(config_.path_header);
    b.logprobs.assign(b.tokens.size(), 0.0);
    b.path_begin = b.tokens.size();
    if (config_.constrained) {
      if (auto open = trie_.step(KGTrie::kRoot, special::kPathOpen)) {
        b.node = *open;
        b.tokens.push_back(special::kPathOpen);
        b.logprobs.push_back(0.0);
      }
    } else {
      b.tokens.push_back(special::kPathOpen);
      b.logprobs.push_back(0.0);
    }
    return b;
  }

  TokenSequence context_of(const Beam& b) const {
    TokenSequence ctx(prompt_.begin(), prompt_.end());
    ctx.insert(ctx.end(), b.tokens.begin(), b.tokens.end());
    return ctx;
  }

  void check_logprob(double lp, std::size_t context_length) const {
    if (!std::isfinite(lp) || lp > 1e-9) {
      throw DecodeError("scorer returned a log-probability that is not finite and <= 0", context_length);
    }
  }

  std::vector<Candidate> expand(const std::vector<Beam>& live) {
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const Beam& b = live[i];
      const TokenSequence ctx = context_of(b);
      auto push = [&](TokenId tok, double lp, Action action, KGTrie::NodeRef node) {
        check_logprob(lp, ctx.size());
        lp = std::min(lp, 0.0);
        const double score = b.score + lp;
        out.push_back(Candidate{i, tok, lp, score, key(score, b.scored + 1), action, node});
      };
      try {
        if (b.phase == Phase::kPath && config_.constrained) {
          const auto kids = trie_.children(b.node);
          TokenSequence tokens;
          tokens.reserve(kids.size());
          for (const auto& c : kids) tokens.push_back(c.token);
          ++scorer_calls_;
          const auto lps = scorer_.score_candidates(ctx, tokens);
          if (lps.size() != tokens.size()) {
            throw DecodeError("scorer returned " + std::to_string(lps.size()) + " scores for " +
                                  std::to_string(tokens.size()) + " candidates",
                              ctx.size());
          }
          for (std::size_t k = 0; k < kids.size(); ++k) {
            const auto node = kids[k].node;
            if (trie_.terminal(node)) {
              push(kids[k].token, lps[k], Action::kClose, node);
              if (!trie_.children(node).empty()) push(kids[k].token, lps[k], Action::kExtend, node);
            } else {
              push(kids[k].token, lps[k], Action::kExtend, node);
            }
          }
        } else {
          ++scorer_calls_;
          const auto top = scorer_.top_tokens(ctx, config_.beam_width);
          for (const auto& st : top) {
            Action action = Action::kExtend;
            if (st.token == special::kEos) {
              action = Action::kFinish;
            } else if (b.phase == Phase::kPath && st.token == special::kPathClose) {
              action = Action::kClose;
            }
            push(st.token, st.logprob, action, b.node);
          }
        }
      } catch (const TransportError& e) {
        throw DecodeError(e.what(), ctx.size());
      }
    }
    return out;
  }

  void close_path(Beam& b) const {
    b.path_end = b.tokens.size();
    if (config_.max_answer_tokens == 0) {
      b.phase = Phase::kDone;
      return;
    }
    b.tokens.insert(b.tokens.end(), answer_header_.begin(), answer_header_.end());
    b.logprobs.insert(b.logprobs.end(), answer_header_.size(), 0.0);
    b.answer_begin = b.tokens.size();
    b.phase = Phase::kAnswer;
  }

  Beam apply(const Beam& parent, const Candidate& c) const {
    Beam b = parent;
    b.tokens.push_back(c.token);
    b.logprobs.push_back(c.logprob);
    b.score = c.score;
    ++b.scored;
    b.step_scores.push_back(c.score);
    b.node = c.node;

    if (b.phase == Phase::kPath) {
      if (c.action == Action::kClose) {
        close_path(b);
      } else if (c.action == Action::kFinish) {
        b.path_end = b.tokens.size() - 1;
        b.answer_begin = b.tokens.size();
        b.phase = Phase::kDone;
      } else if (!config_.constrained && b.tokens.size() - b.path_begin >= config_.max_path_tokens) {
        b.path_end = b.tokens.size();
        b.answer_begin = b.tokens.size();
        b.phase = Phase::kDone;
      }
    } else if (b.phase == Phase::kAnswer) {
      if (c.action == Action::kFinish) {
        b.phase = Phase::kDone;
      } else if (++b.answer_count >= config_.max_answer_tokens) {
        b.phase = Phase::kDone;
      }
    }
    return b;
  }

  bool can_stop(const std::vector<Beam>& live, const std::vector<Beam>& finished) const {
    if (live.empty()) return true;
    if (config_.length_normalization || finished.size() < config_.beam_width) return false;
    std::vector<double> keys;
    keys.reserve(finished.size());
    for (const auto& f : finished) keys.push_back(key(f.score, f.scored));
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(config_.beam_width - 1), keys.end(),
                     std::greater<>());
    const double cutoff = keys[config_.beam_width - 1];
    double best_live = live.front().score;
    for (const auto& b : live) best_live = std::max(best_live, b.score);
    // Scores only decrease, so no live beam can still overtake the k-th finished one.
    return best_live < cutoff;
  }

  DecodeResult to_result(const Beam& b) const {
    DecodeResult r;
    const auto path = std::span<const TokenId>(b.tokens).subspan(b.path_begin, b.path_end - b.path_begin);
    r.path_text = vocab_.decode(path);
    r.path_tokens = path.size();
    if (b.answer_begin > 0 && b.answer_begin <= b.tokens.size()) {
      auto answer = std::span<const TokenId>(b.tokens).subspan(b.answer_begin);
      if (!answer.empty() && answer.back() == special::kEos) answer = answer.first(answer.size() - 1);
      r.answer_text = vocab_.decode(answer);
      r.answer_tokens = answer.size();
    }
    r.log_score = b.score;
    r.tokens = b.tokens;
    r.token_logprobs = b.logprobs;
    r.step_scores = b.step_scores;
    return r;
  }

  const Scorer& scorer_;
  const Vocab& vocab_;
  std::span<const TokenId> prompt_;
  const KGTrie& trie_;
  const DecodeConfig& config_;
  TokenSequence answer_header_;
  std::size_t scorer_calls_ = 0;
};

}  // namespace

DecodeOutput decode(const Scorer& scorer, const Vocab& vocab, std::span<const TokenId> prompt, const KGTrie& trie,
                    const DecodeConfig& config) {
  if (config.beam_width < 1) throw ConfigError("beam width must be >= 1");
  std::uint64_t scorer_fp = 0;
  try {
    scorer_fp = scorer.vocab_fingerprint();
  } catch (const TransportError& e) {
    throw DecodeError(e.what(), prompt.size());
  }
  if (scorer_fp != vocab.fingerprint()) {
    throw ConfigError("scorer vocabulary " + fingerprint_hex(scorer_fp) + " does not match the decoding vocabulary " +
                      fingerprint_hex(vocab.fingerprint()));
  }
  if (config.constrained && trie.vocab_fingerprint() != vocab.fingerprint()) {
    throw ConfigError("trie vocabulary " + fingerprint_hex(trie.vocab_fingerprint()) +
                      " does not match the decoding vocabulary " + fingerprint_hex(vocab.fingerprint()));
  }
  return Search(scorer, vocab, prompt, trie, config).run();
}

}  // namespace gcr
