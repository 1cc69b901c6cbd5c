#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gcr/errors.hpp"
#include "gcr/reasoner.hpp"
#include "support/fixtures.hpp"

using namespace gcr;

namespace {

const std::string kArrowText = "\xE2\x86\x92";
const std::string kQuestion = "what is the name of justin bieber brother?";

std::string golden(const std::string& name) {
  std::ifstream in(std::filesystem::path(GCR_GOLDEN_DIR) / name, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string arrowed(std::initializer_list<std::string> parts) {
  std::string out = "<PATH>";
  bool first = true;
  for (const auto& p : parts) {
    out += first ? " " : " " + kArrowText + " ";
    out += p;
    first = false;
  }
  return out + " </PATH>";
}

struct Pipeline {
  KnowledgeGraph kg = gcr::testing::t1_graph();
  Vocab vocab = reference_vocab(kg);
  TrieProvider tries{kg, vocab, 2, 16};
  TableScorer scorer = make_table_scorer(vocab);

  Pipeline() {
    auto id = [&](const std::string& s) { return *vocab.find(s); };
    std::vector<TableScorer::Row> rows{
        {vocab.encode("</PATH> # Answer:"), {{id("C"), 0.9}, {id("E"), 0.1}}},
        {vocab.encode("# Answer: C"), {{special::kEos, 1.0}}},
        {vocab.encode("# Answer: E"), {{special::kEos, 1.0}}},
    };
    scorer = make_table_scorer(vocab, rows);
  }

  AnswerContext context(const ChatClient& chat) {
    DecodeConfig config;
    config.beam_width = 5;
    return AnswerContext{kg, vocab, tries, scorer, chat, config};
  }
};

}  // namespace

TEST_SUITE("reasoner") {
  TEST_CASE("generation prompt matches the golden file") {
    const std::vector<std::string> entities{"Justin Bieber"};
    const auto prompt = render_generation_prompt(kQuestion, entities);
    CHECK(prompt == golden("generation_prompt.txt"));
    CHECK(prompt.starts_with("Reasoning path is a sequence of triples in the KG"));
    CHECK(render_generation_prompt(kQuestion, entities) == prompt);
    CHECK_THROWS_AS(render_generation_prompt(kQuestion, {}), RenderError);
    CHECK_THROWS_AS(render_generation_prompt("", entities), RenderError);
  }

  TEST_CASE("few-shot prompt matches the golden file") {
    const std::vector<std::string> entities{"Justin Bieber"};
    const std::vector<FewShotExample> examples{
        {"who is the father of justin bieber?", {"Justin Bieber"},
         arrowed({"Justin Bieber", "people.person.parents", "Jeremy Bieber"})},
        {"where was jeremy bieber born?", {"Jeremy Bieber", "Canada"},
         arrowed({"Jeremy Bieber", "people.person.place_of_birth", "Stratford"})},
    };
    CHECK(render_few_shot_prompt(kQuestion, entities, examples) == golden("few_shot_prompt.txt"));
    CHECK_THROWS_AS(render_few_shot_prompt(kQuestion, entities, {}), RenderError);
  }

  TEST_CASE("reasoning prompt matches the golden file") {
    std::vector<DecodeResult> results(2);
    results[0].path_text = arrowed({"Justin Bieber", "people.person.parents", "Jeremy Bieber",
                                    "people.person.children", "Jaxon Bieber"});
    results[0].answer_text = "Jaxon Bieber";
    results[1].path_text = arrowed({"Justin Bieber", "people.person.sibling_s", "Jazmyn Bieber"});
    results[1].answer_text = "Jazmyn Bieber";
    const auto prompt = render_reasoning_prompt(kQuestion, results);
    CHECK(prompt == golden("reasoning_prompt.txt"));
    CHECK(prompt.find("Please return each answer in a new line") != std::string::npos);
    CHECK(prompt.find(results[0].path_text) < prompt.find(results[1].path_text));

    const std::vector<DecodeResult> one(results.begin(), results.begin() + 1);
    CHECK(render_reasoning_prompt(kQuestion, one).starts_with("# Reasoning Paths:\n" + results[0].path_text));
    CHECK_THROWS_AS(render_reasoning_prompt(kQuestion, {}), RenderError);
  }

  TEST_CASE("generation target") {
    CHECK(render_generation_target("<PATH> A </PATH>", "B") == "# Reasoning Path:\n<PATH> A </PATH>\n# Answer:\nB");
  }

  TEST_CASE("parse_answers") {
    CHECK(parse_answers("Jaxon Bieber\n") == std::vector<std::string>{"Jaxon Bieber"});
    CHECK(parse_answers("- a\n- a\n- b") == std::vector<std::string>{"a", "b"});
    CHECK(parse_answers("").empty());
    CHECK(parse_answers("1. x\n2) y\n  * z  \n\n") == std::vector<std::string>{"x", "y", "z"});
    CHECK(parse_answers("1990s\n") == std::vector<std::string>{"1990s"});
  }

  TEST_CASE("hypotheses are read back from a reasoning prompt") {
    std::vector<DecodeResult> results(3);
    for (auto& r : results) r.path_text = arrowed({"A", "r1", "B"});
    results[0].answer_text = "C";
    results[1].answer_text = "E";
    results[2].answer_text = "C";
    const auto prompt = render_reasoning_prompt("q?", results);
    CHECK(hypotheses_in_prompt(prompt) == std::vector<std::string>{"C", "E", "C"});
    CHECK(StubChatClient::majority()->complete(prompt).content == "C\n");
  }

  TEST_CASE("end to end on the toy graph") {
    Pipeline p;
    const auto chat = StubChatClient::majority();
    const QARecord record{"q1", "where does A lead?", {"A"}, {"C"}, {}};
    const auto outcome = answer_question(record, p.context(*chat));
    CHECK(outcome.final.answers == std::vector<std::string>{"C"});
    CHECK_FALSE(outcome.no_grounded_evidence);
    CHECK(outcome.trace.chat_calls == 1);
    CHECK(outcome.trace.scorer_sessions == 1);
    CHECK(outcome.trace.llm_calls() == 2);
    CHECK(outcome.trace.llm_tokens() > 0);
    CHECK(outcome.trace.trie_paths == 5);
    CHECK(chat->calls() == 1);
    for (const auto& r : outcome.final.provenance) {
      CHECK(parse_path(p.kg, r.path_text).grounded());
      CHECK(outcome.reasoning_prompt.find(r.path_text) != std::string::npos);
    }

    const auto again = answer_question(record, p.context(*chat));
    CHECK(again.trace.trie_cache_hit);
    CHECK(again.reasoning_prompt == outcome.reasoning_prompt);
  }

  TEST_CASE("unknown entity and empty chat") {
    Pipeline p;
    const auto chat = StubChatClient::fixed("");
    const QARecord missing{"q2", "?", {"Nobody"}, {"C"}, {}};
    CHECK_THROWS_AS(answer_question(missing, p.context(*chat)), UnknownEntityError);

    const QARecord record{"q3", "where does A lead?", {"A"}, {"C"}, {}};
    const auto outcome = answer_question(record, p.context(*chat));
    CHECK(outcome.final.answers.empty());
    CHECK(chat->calls() == 1);
  }

  TEST_CASE("no grounded evidence skips the chat call") {
    Pipeline p;
    const auto chat = StubChatClient::majority();
    const QARecord sink{"q4", "what follows C?", {"C"}, {"A"}, {}};
    const auto outcome = answer_question(sink, p.context(*chat));
    CHECK(outcome.no_grounded_evidence);
    CHECK(outcome.final.answers.empty());
    CHECK(outcome.trace.chat_calls == 0);
    CHECK(chat->calls() == 0);
  }

  TEST_CASE("chat failure keeps the trace") {
    Pipeline p;
    const auto path = std::filesystem::temp_directory_path() / "gcr_empty_replay.jsonl";
    { std::ofstream(path) << ""; }
    const auto replay = StubChatClient::replay(path);
    const QARecord record{"q5", "where does A lead?", {"A"}, {"C"}, {}};
    try {
      answer_question(record, p.context(*replay));
      FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
      CHECK(e.trace().chat_calls == 1);
      CHECK(e.trace().scorer_sessions == 1);
    }
    std::filesystem::remove(path);
  }

  TEST_CASE("replay stub prefers the record keyed by question") {
    const auto path = std::filesystem::temp_directory_path() / "gcr_replay.jsonl";
    {
      std::ofstream out(path);
      out << R"({"response": "first"})" << "\n";
      out << R"({"question": "where does A lead?", "response": "C\nE"})" << "\n";
    }
    const auto replay = StubChatClient::replay(path);
    CHECK(replay->complete("# Question:\nwhere does A lead?\n\nBased on").content == "C\nE");
    CHECK(replay->complete("# Question:\nother?\n").content == "first");
    CHECK_THROWS_AS(replay->complete("# Question:\nother?\n"), Error);
    std::filesystem::remove(path);
  }
}
