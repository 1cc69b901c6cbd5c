#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcr/dataset.hpp"
#include "gcr/kg.hpp"
#include "gcr/reasoner.hpp"

namespace gcr {

// Trim, ASCII case-fold and collapse internal whitespace, then compare exactly.
struct MatchPolicy {
  std::string normalize(std::string_view s) const;
  bool equal(std::string_view a, std::string_view b) const { return normalize(a) == normalize(b); }
};

struct PRF1 {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Both throw Error on an empty gold list.
int hit(std::span<const std::string> predictions, std::span<const std::string> gold, const MatchPolicy& policy = {});
PRF1 prf1(std::span<const std::string> predictions, std::span<const std::string> gold,
          const MatchPolicy& policy = {});

struct McqRow {
  std::string predicted;
  std::string gold;
  std::vector<std::string> labels;
};

struct McqScore {
  double accuracy = 0;
  std::size_t invalid_predictions = 0;  // predicted label not among the choices
};

McqScore mcq_accuracy(std::span<const McqRow> rows);

struct FaithfulnessRow {
  std::vector<std::string> paths;
  bool hit = false;
};

// Among questions with hit = 1, the fraction whose paths all ground in `kg`.
// nullopt when no question was answered correctly.
std::optional<double> faithful_ratio(std::span<const FaithfulnessRow> rows, const KnowledgeGraph& kg);

// Maps a free-text answer onto a choice label: exact label, then choice text.
std::optional<std::string> match_choice(std::string_view answer, std::span<const Choice> choices,
                                        const MatchPolicy& policy = {});

struct EvalRow {
  std::string id;
  std::vector<std::string> predictions;
  std::vector<std::string> gold;
  std::vector<std::string> paths;
  int hit = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::optional<double> faithful;  // fraction of this question's paths that ground
  bool multiple_choice = false;
  std::optional<std::string> predicted_label;  // first prediction mapped onto a choice
  bool label_correct = false;
  bool no_grounded_evidence = false;
  double runtime_seconds = 0;
  std::size_t llm_calls = 0;
  std::size_t llm_tokens = 0;
  bool failed = false;
  std::string error;
};

struct EvalAggregates {
  std::size_t questions = 0;
  std::size_t evaluated = 0;
  std::size_t failures = 0;
  double hit = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::optional<double> accuracy;  // multiple-choice rows only
  std::optional<double> faithful_ratio;
  double avg_runtime_seconds = 0;
  double avg_llm_calls = 0;
  double avg_llm_tokens = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  EvalAggregates aggregates;

  nlohmann::ordered_json to_json(bool include_timings = true) const;
  std::string summary() const;
};

using Pipeline = std::function<AnswerOutcome(const QARecord&)>;

struct EvalOptions {
  unsigned jobs = 1;
};

// Runs the pipeline on every record (in parallel up to `jobs`), keeping rows in
// input order. Records whose pipeline throws are marked failed and left out of
// the aggregates. Throws Error on an empty dataset.
EvalReport run_eval(std::span<const QARecord> dataset, const Pipeline& pipeline, const KnowledgeGraph& kg,
                    const EvalOptions& options = {});

// Recomputes aggregates from rows (macro averages over non-failed rows).
EvalAggregates aggregate(std::span<const EvalRow> rows, const KnowledgeGraph& kg);

}  // namespace gcr
