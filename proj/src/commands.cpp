#include "gcr/commands.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>

#include <spdlog/spdlog.h>

#include "gcr/chat.hpp"
#include "gcr/dataset.hpp"
#include "gcr/errors.hpp"
#include "gcr/index.hpp"
#include "gcr/reasoner.hpp"
#include "gcr/remote_scorer.hpp"

namespace gcr {

namespace {

using ordered = nlohmann::ordered_json;

struct Session {
  KnowledgeGraph kg;
  Vocab vocab;
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required setting --") + flag);
}

Session open_session(const RunConfig& cfg) {
  require(cfg.kg, "kg");
  Session s{load_kg_file(cfg.kg), {}};
  s.vocab = cfg.vocab.empty() ? reference_vocab(s.kg) : load_vocab_file(cfg.vocab);
  spdlog::info("kg: {} entities, {} relations, {} triples; vocab {} tokens", s.kg.n_entities(), s.kg.n_relations(),
               s.kg.n_triples(), s.vocab.size());
  return s;
}

bool is_url(const std::string& s) { return s.starts_with("http://") || s.starts_with("https://"); }

std::chrono::milliseconds timeout_of(const RunConfig& cfg) {
  return std::chrono::milliseconds(static_cast<long long>(cfg.timeout_seconds * 1000));
}

std::unique_ptr<Scorer> make_scorer(const RunConfig& cfg, const Vocab& vocab) {
  const auto& backend = cfg.scorer;
  if (backend == "uniform") return std::make_unique<TableScorer>(make_table_scorer(vocab));
  if (is_url(backend)) {
    std::optional<std::string> key;
    if (!cfg.scorer_key.empty()) key = cfg.scorer_key;
    return make_remote_scorer(backend, key, timeout_of(cfg), cfg.retries);
  }
  return std::make_unique<TableScorer>(load_table_scorer(backend, vocab));
}

// stub:majority | stub:fixed:TEXT | stub:FILE (replay) | URL | "http" with chat_endpoint
std::unique_ptr<ChatClient> make_chat(const RunConfig& cfg) {
  const auto& backend = cfg.chat;
  if (backend == "stub:majority") return StubChatClient::majority();
  if (backend.starts_with("stub:fixed:")) return StubChatClient::fixed(backend.substr(11));
  if (backend.starts_with("stub:")) return StubChatClient::replay(backend.substr(5));
  ChatSettings settings;
  settings.endpoint = is_url(backend) ? backend : cfg.chat_endpoint;
  if (!is_url(settings.endpoint)) throw ConfigError("unrecognized chat backend: " + backend);
  settings.model = cfg.chat_model;
  if (!cfg.chat_key.empty()) settings.api_key = cfg.chat_key;
  settings.timeout = timeout_of(cfg);
  settings.retries = cfg.retries;
  settings.max_in_flight = std::max(1u, cfg.jobs);
  return std::make_unique<HttpChatClient>(settings);
}

DecodeConfig decode_config(const RunConfig& cfg) {
  DecodeConfig d;
  d.beam_width = cfg.beam;
  d.max_answer_tokens = cfg.max_answer_tokens;
  return d;
}

std::vector<EntityId> resolve(const KnowledgeGraph& kg, const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("at least one --entity is required");
  std::vector<EntityId> ids;
  for (const auto& n : names) ids.push_back(kg.entity(n));
  return ids;
}

ordered result_json(const DecodeResult& r) {
  return {{"path", r.path_text}, {"answer", r.answer_text}, {"log_score", r.log_score}};
}

void emit(const RunConfig& cfg, std::ostream& fallback, const std::string& text) {
  if (cfg.out.empty() || cfg.out == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + cfg.out);
  f << text;
}

}  // namespace

RunConfig resolve_config(const std::string& config_file, const std::function<const char*(const char*)>& getenv_fn,
                         const Settings& flags) {
  RunConfig cfg;
  std::string file = config_file;
  if (file.empty()) {
    if (const char* env = getenv_fn("GCR_CONFIG"); env && *env) file = env;
  }
  if (!file.empty()) apply_settings(cfg, read_settings_file(file));
  apply_settings(cfg, env_settings(getenv_fn));
  apply_settings(cfg, flags);
  if (cfg.jobs == 0) throw ConfigError("jobs must be at least 1");
  if (cfg.beam == 0) throw ConfigError("beam must be at least 1");
  if (cfg.cache_capacity == 0) throw ConfigError("cache_capacity must be at least 1");
  return cfg;
}

ordered cmd_build_trie(const RunConfig& cfg, const std::vector<std::string>& entities, std::ostream& out) {
  const auto s = open_session(cfg);
  const auto ids = resolve(s.kg, entities);
  TrieBuildStats stats;
  const auto trie = build_question_trie(s.kg, ids, cfg.hops, s.vocab, cfg.jobs, &stats);
  if (!cfg.trie.empty()) save_trie_file(trie, cfg.trie);
  ordered j{{"n_paths", trie.n_paths()},
            {"n_nodes", trie.n_nodes()},
            {"hops", cfg.hops},
            {"paths_found", stats.paths_found},
            {"paths_skipped", stats.paths_skipped},
            {"retrieval_seconds", stats.retrieval_seconds},
            {"tokenization_seconds", stats.tokenization_seconds},
            {"trie_seconds", stats.trie_seconds},
            {"vocab_fingerprint", fingerprint_hex(trie.vocab_fingerprint())}};
  out << j.dump(2) << '\n';
  return j;
}

ordered cmd_decode(const RunConfig& cfg, const std::string& question, const std::vector<std::string>& entities,
                   std::ostream& out) {
  if (question.empty()) throw ConfigError("--question is required");
  if (entities.empty()) throw ConfigError("at least one --entity is required");
  const auto s = open_session(cfg);
  const auto scorer = make_scorer(cfg, s.vocab);
  KGTrie trie;
  if (!cfg.trie.empty()) {
    trie = load_trie_file(cfg.trie);
    if (auto w = fingerprint_warning(trie, s.vocab.fingerprint())) spdlog::warn("{}", *w);
  } else {
    trie = build_question_trie(s.kg, resolve(s.kg, entities), cfg.hops, s.vocab, cfg.jobs);
  }
  const auto prompt = s.vocab.encode(render_generation_prompt(question, entities));
  const auto decoded = decode(*scorer, s.vocab, prompt, trie, decode_config(cfg));
  ordered j = ordered::array();
  for (const auto& r : decoded.results) j.push_back(result_json(r));
  emit(cfg, out, j.dump(2) + "\n");
  return j;
}

ordered cmd_answer(const RunConfig& cfg, const std::string& question, const std::vector<std::string>& entities,
                   std::ostream& out) {
  if (question.empty()) throw ConfigError("--question is required");
  if (entities.empty()) throw ConfigError("at least one --entity is required");
  const auto s = open_session(cfg);
  const auto scorer = make_scorer(cfg, s.vocab);
  const auto chat = make_chat(cfg);
  TrieProvider tries(s.kg, s.vocab, cfg.hops, cfg.cache_capacity, cfg.jobs);
  const QARecord record{"cli", question, entities, {}, {}};
  const auto outcome =
      answer_question(record, AnswerContext{s.kg, s.vocab, tries, *scorer, *chat, decode_config(cfg)});
  ordered evidence = ordered::array();
  for (const auto& r : outcome.final.provenance) evidence.push_back(result_json(r));
  ordered j{{"question", question},
            {"answers", outcome.final.answers},
            {"no_grounded_evidence", outcome.no_grounded_evidence},
            {"evidence", evidence},
            {"trace",
             {{"llm_calls", outcome.trace.llm_calls()},
              {"llm_tokens", outcome.trace.llm_tokens()},
              {"chat_calls", outcome.trace.chat_calls},
              {"trie_paths", outcome.trace.trie_paths},
              {"total_seconds", outcome.trace.total_seconds}}}};
  emit(cfg, out, j.dump(2) + "\n");
  return j;
}

EvalReport cmd_eval(const RunConfig& cfg, bool include_timings, std::ostream& out) {
  require(cfg.qa, "qa");
  const auto s = open_session(cfg);
  const auto data = load_qa_file(cfg.qa);
  const auto scorer = make_scorer(cfg, s.vocab);
  const auto chat = make_chat(cfg);
  TrieProvider tries(s.kg, s.vocab, cfg.hops, cfg.cache_capacity);
  const AnswerContext ctx{s.kg, s.vocab, tries, *scorer, *chat, decode_config(cfg)};
  const Pipeline pipeline = [&](const QARecord& r) { return answer_question(r, ctx); };
  auto report = run_eval(data, pipeline, s.kg, EvalOptions{cfg.jobs});
  if (!cfg.out.empty() && cfg.out != "-") {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + cfg.out);
    f << report.to_json(include_timings).dump(2) << '\n';
  }
  out << report.summary();
  spdlog::info("trie cache: {} hits, {} misses; {} chat calls", tries.cache().hits(), tries.cache().misses(),
               chat->calls());
  return report;
}

TrainStats cmd_gen_train(const RunConfig& cfg, std::ostream& out) {
  require(cfg.qa, "qa");
  const auto s = open_session(cfg);
  const auto data = load_qa_file(cfg.qa);
  TrainOptions opts;
  opts.jobs = cfg.jobs;
  TrainStats stats;
  const auto instances = generate_instances(s.kg, data, opts, &stats);
  if (cfg.out.empty() || cfg.out == "-") {
    write_instances(out, instances);
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + cfg.out);
    write_instances(f, instances);
  }
  spdlog::info("{} records -> {} instances ({} zero-hop, {} duplicates, {} unreachable pairs, {} unresolved answers)",
               stats.records, stats.instances, stats.zero_hop, stats.duplicates, stats.unreachable_pairs,
               stats.unresolved_answers);
  return stats;
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const PipelineError*>(&e) || dynamic_cast<const DecodeError*>(&e) ||
      dynamic_cast<const TransportError*>(&e)) {
    return kExitPipelineFailure;
  }
  return kExitUsage;
}

}  // namespace gcr
