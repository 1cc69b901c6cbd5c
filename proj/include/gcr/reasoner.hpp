#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcr/chat.hpp"
#include "gcr/dataset.hpp"
#include "gcr/decoder.hpp"
#include "gcr/index.hpp"
#include "gcr/kg.hpp"

namespace gcr {

class RenderError : public Error {
 public:
  using Error::Error;
};

struct FewShotExample {
  std::string question;
  std::vector<std::string> entities;
  std::string path;
};

// Prompt asking the KG-specialized model for reasoning paths. The few-shot
// variant prepends numbered examples and requires at least one.
std::string render_generation_prompt(std::string_view question, std::span<const std::string> entities);
std::string render_few_shot_prompt(std::string_view question, std::span<const std::string> entities,
                                   std::span<const FewShotExample> examples);

// Inductive-reasoning prompt: one "<path> <hypothesis answer>" line per result.
std::string render_reasoning_prompt(std::string_view question, std::span<const DecodeResult> results);

// Supervised target for fine-tuning: the output block the generator is trained to emit.
std::string render_generation_target(std::string_view path, std::string_view answer);

struct FinalAnswerSet {
  std::vector<std::string> answers;
  std::vector<DecodeResult> provenance;
};

// One answer per line; list markers ("-", "*", "1.", "1)") and surrounding
// whitespace are stripped, blanks dropped, duplicates removed keeping the first.
std::vector<std::string> parse_answers(std::string_view text);

struct AnswerTrace {
  double retrieval_seconds = 0;
  double tokenization_seconds = 0;
  double trie_seconds = 0;
  double decode_seconds = 0;
  double reasoning_seconds = 0;
  double total_seconds = 0;
  bool trie_cache_hit = false;
  std::uint64_t trie_paths = 0;

  std::size_t scorer_sessions = 0;  // one per beam search
  std::size_t scorer_requests = 0;
  std::size_t chat_calls = 0;

  std::size_t decode_prompt_tokens = 0;
  std::size_t decode_generated_tokens = 0;
  std::size_t chat_prompt_tokens = 0;
  std::size_t chat_response_tokens = 0;
  bool chat_tokens_estimated = true;

  std::size_t llm_calls() const noexcept { return scorer_sessions + chat_calls; }
  std::size_t llm_tokens() const noexcept {
    return decode_prompt_tokens + decode_generated_tokens + chat_prompt_tokens + chat_response_tokens;
  }
};

struct AnswerOutcome {
  FinalAnswerSet final;
  AnswerTrace trace;
  bool no_grounded_evidence = false;
  std::string reasoning_prompt;
  std::string chat_response;
};

// Failure after the pipeline started; keeps the partial trace.
class PipelineError : public Error {
 public:
  PipelineError(const std::string& what, AnswerTrace trace) : Error(what), trace_(trace) {}
  const AnswerTrace& trace() const noexcept { return trace_; }

 private:
  AnswerTrace trace_;
};

struct AnswerContext {
  const KnowledgeGraph& kg;
  const Vocab& vocab;
  TrieProvider& tries;
  const Scorer& scorer;
  const ChatClient& chat;
  DecodeConfig decode;
};

// Trie lookup/build, one constrained beam search, one chat call, answer parsing.
// Unknown question entities throw UnknownEntityError. With no grounded path
// the chat model is not called and the answer set is empty.
AnswerOutcome answer_question(const QARecord& record, const AnswerContext& ctx);

}  // namespace gcr
