#include "gcr/reasoner.hpp"

#include <chrono>
#include <unordered_set>

namespace gcr {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::string_view kGenerationInstruction =
    "Reasoning path is a sequence of triples in the KG that connects the topic entities in the question to answer "
    "entities. Given a question, please generate some reasoning paths in the KG starting from the topic entities to "
    "answer the question.";

constexpr std::string_view kReasoningInstruction =
    "Based on the reasoning paths, please answer the given question. Please keep the answer as simple as possible "
    "and only return answers. Please return each answer in a new line.";

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string join(std::span<const std::string> items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

void require_slots(std::string_view question, std::span<const std::string> entities) {
  if (question.empty()) throw RenderError("prompt slot 'question' is empty");
  if (entities.empty()) throw RenderError("prompt slot 'topic entities' is empty");
}

void append_question_block(std::string& out, std::string_view question, std::span<const std::string> entities) {
  out += "# Question:\n";
  out += question;
  out += "\n\n# Topic entities:\n";
  out += join(entities, ", ");
  out += '\n';
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string_view strip_marker(std::string_view line) {
  if (line.starts_with("- ") || line.starts_with("* ") || line == "-" || line == "*") return trim(line.substr(1));
  std::size_t digits = 0;
  while (digits < line.size() && line[digits] >= '0' && line[digits] <= '9') ++digits;
  if (digits > 0 && digits < line.size() && (line[digits] == '.' || line[digits] == ')') &&
      (digits + 1 == line.size() || line[digits + 1] == ' ' || line[digits + 1] == '\t')) {
    return trim(line.substr(digits + 1));
  }
  return line;
}

}  // namespace

std::string render_generation_prompt(std::string_view question, std::span<const std::string> entities) {
  require_slots(question, entities);
  std::string out(kGenerationInstruction);
  out += "\n\n";
  append_question_block(out, question, entities);
  return out;
}

std::string render_few_shot_prompt(std::string_view question, std::span<const std::string> entities,
                                   std::span<const FewShotExample> examples) {
  require_slots(question, entities);
  if (examples.empty()) throw RenderError("few-shot prompt needs at least one example");
  std::string out(kGenerationInstruction);
  out += "\n\n";
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    require_slots(ex.question, ex.entities);
    if (ex.path.empty()) throw RenderError("few-shot example " + std::to_string(i + 1) + " has no reasoning path");
    out += "Example " + std::to_string(i + 1) + "\n\n";
    append_question_block(out, ex.question, ex.entities);
    out += "\n# Reasoning Path:\n";
    out += ex.path;
    out += "\n\n";
  }
  out += "Input\n\n";
  append_question_block(out, question, entities);
  return out;
}

std::string render_reasoning_prompt(std::string_view question, std::span<const DecodeResult> results) {
  if (question.empty()) throw RenderError("prompt slot 'question' is empty");
  if (results.empty()) throw RenderError("reasoning prompt needs at least one reasoning path");
  std::string out = "# Reasoning Paths:\n";
  for (const auto& r : results) {
    out += r.path_text;
    if (!r.answer_text.empty()) {
      out += ' ';
      out += r.answer_text;
    }
    out += '\n';
  }
  out += "\n# Question:\n";
  out += question;
  out += "\n\n";
  out += kReasoningInstruction;
  out += '\n';
  return out;
}

std::string render_generation_target(std::string_view path, std::string_view answer) {
  std::string out(kPathHeader);
  out += '\n';
  out += path;
  out += '\n';
  out += kAnswerHeader;
  out += '\n';
  out += answer;
  return out;
}

std::vector<std::string> parse_answers(std::string_view text) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = trim(strip_marker(trim(text.substr(0, nl))));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    std::string answer(line);
    if (seen.insert(answer).second) out.push_back(std::move(answer));
  }
  return out;
}

AnswerOutcome answer_question(const QARecord& record, const AnswerContext& ctx) {
  const auto start = Clock::now();
  AnswerOutcome outcome;
  auto& trace = outcome.trace;

  std::vector<EntityId> entities;
  for (const auto& name : record.question_entities) entities.push_back(ctx.kg.entity(name));
  if (entities.empty()) throw ConfigError("record '" + record.id + "' has no question entities");

  auto lookup = ctx.tries.get(entities);
  trace.trie_cache_hit = lookup.cache_hit;
  trace.retrieval_seconds = lookup.stats.retrieval_seconds;
  trace.tokenization_seconds = lookup.stats.tokenization_seconds;
  trace.trie_seconds = lookup.stats.trie_seconds;
  trace.trie_paths = lookup.trie->n_paths();

  const auto prompt_tokens = ctx.vocab.encode(render_generation_prompt(record.question, record.question_entities));
  auto t0 = Clock::now();
  DecodeOutput decoded;
  try {
    decoded = decode(ctx.scorer, ctx.vocab, prompt_tokens, *lookup.trie, ctx.decode);
  } catch (const Error& e) {
    trace.total_seconds = seconds_since(start);
    throw PipelineError(std::string("constrained decoding failed: ") + e.what(), trace);
  }
  trace.decode_seconds = seconds_since(t0);
  if (!lookup.trie->empty()) {
    trace.scorer_sessions = 1;
    trace.scorer_requests = decoded.scorer_calls;
    trace.decode_prompt_tokens = prompt_tokens.size();
    for (const auto& r : decoded.results) trace.decode_generated_tokens += r.path_tokens + r.answer_tokens;
  }
  outcome.final.provenance = decoded.results;

  if (decoded.results.empty()) {
    outcome.no_grounded_evidence = true;
    trace.total_seconds = seconds_since(start);
    return outcome;
  }

  outcome.reasoning_prompt = render_reasoning_prompt(record.question, decoded.results);
  t0 = Clock::now();
  ChatReply reply;
  try {
    ++trace.chat_calls;
    reply = ctx.chat.complete(outcome.reasoning_prompt);
  } catch (const Error& e) {
    trace.total_seconds = seconds_since(start);
    throw PipelineError(std::string("chat call failed: ") + e.what(), trace);
  }
  trace.reasoning_seconds = seconds_since(t0);
  outcome.chat_response = reply.content;
  if (reply.prompt_tokens && reply.completion_tokens) {
    trace.chat_prompt_tokens = *reply.prompt_tokens;
    trace.chat_response_tokens = *reply.completion_tokens;
    trace.chat_tokens_estimated = false;
  } else {
    trace.chat_prompt_tokens = split_whitespace(outcome.reasoning_prompt).size();
    trace.chat_response_tokens = split_whitespace(reply.content).size();
  }
  outcome.final.answers = parse_answers(reply.content);
  trace.total_seconds = seconds_since(start);
  return outcome;
}

}  // namespace gcr
