#include "gcr/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "gcr/errors.hpp"

namespace gcr {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::set<std::string> normalized_set(std::span<const std::string> items, const MatchPolicy& policy) {
  std::set<std::string> out;
  for (const auto& s : items) out.insert(policy.normalize(s));
  return out;
}

void require_gold(std::span<const std::string> gold) {
  if (gold.empty()) throw Error("gold answer list is empty");
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0;
  double sum = 0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string MatchPolicy::normalize(std::string_view s) const {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

int hit(std::span<const std::string> predictions, std::span<const std::string> gold, const MatchPolicy& policy) {
  require_gold(gold);
  const auto g = normalized_set(gold, policy);
  for (const auto& p : predictions) {
    if (g.contains(policy.normalize(p))) return 1;
  }
  return 0;
}

PRF1 prf1(std::span<const std::string> predictions, std::span<const std::string> gold, const MatchPolicy& policy) {
  require_gold(gold);
  const auto p = normalized_set(predictions, policy);
  const auto g = normalized_set(gold, policy);
  std::size_t common = 0;
  for (const auto& x : p) common += g.contains(x);
  PRF1 out;
  out.precision = p.empty() ? 0.0 : static_cast<double>(common) / static_cast<double>(p.size());
  out.recall = static_cast<double>(common) / static_cast<double>(g.size());
  const double denom = out.precision + out.recall;
  out.f1 = denom > 0 ? 2 * out.precision * out.recall / denom : 0.0;
  return out;
}

McqScore mcq_accuracy(std::span<const McqRow> rows) {
  McqScore out;
  if (rows.empty()) return out;
  std::size_t correct = 0;
  for (const auto& r : rows) {
    const bool valid = std::find(r.labels.begin(), r.labels.end(), r.predicted) != r.labels.end();
    if (!valid) {
      ++out.invalid_predictions;
      continue;
    }
    correct += r.predicted == r.gold;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(rows.size());
  return out;
}

std::optional<double> faithful_ratio(std::span<const FaithfulnessRow> rows, const KnowledgeGraph& kg) {
  std::size_t answered = 0, faithful = 0;
  for (const auto& r : rows) {
    if (!r.hit) continue;
    ++answered;
    const bool all = std::all_of(r.paths.begin(), r.paths.end(), [&](const std::string& p) {
      return parse_path(kg, p).status == PathStatus::kGrounded;
    });
    faithful += all;
  }
  if (answered == 0) return std::nullopt;
  return static_cast<double>(faithful) / static_cast<double>(answered);
}

std::optional<std::string> match_choice(std::string_view answer, std::span<const Choice> choices,
                                        const MatchPolicy& policy) {
  for (const auto& c : choices) {
    if (policy.equal(answer, c.label)) return c.label;
  }
  for (const auto& c : choices) {
    if (policy.equal(answer, c.text)) return c.label;
  }
  return std::nullopt;
}

EvalAggregates aggregate(std::span<const EvalRow> rows, const KnowledgeGraph& kg) {
  EvalAggregates agg;
  agg.questions = rows.size();
  std::vector<double> hits, ps, rs, fs, runtimes, calls, tokens, correct;
  std::vector<FaithfulnessRow> faith;
  for (const auto& row : rows) {
    if (row.failed) {
      ++agg.failures;
      continue;
    }
    hits.push_back(row.hit);
    ps.push_back(row.precision);
    rs.push_back(row.recall);
    fs.push_back(row.f1);
    runtimes.push_back(row.runtime_seconds);
    calls.push_back(static_cast<double>(row.llm_calls));
    tokens.push_back(static_cast<double>(row.llm_tokens));
    faith.push_back(FaithfulnessRow{row.paths, row.hit == 1});
    if (row.multiple_choice) correct.push_back(row.label_correct ? 1.0 : 0.0);
  }
  agg.evaluated = hits.size();
  agg.hit = mean(hits);
  agg.precision = mean(ps);
  agg.recall = mean(rs);
  agg.f1 = mean(fs);
  agg.avg_runtime_seconds = mean(runtimes);
  agg.avg_llm_calls = mean(calls);
  agg.avg_llm_tokens = mean(tokens);
  if (!correct.empty()) agg.accuracy = mean(correct);
  agg.faithful_ratio = faithful_ratio(faith, kg);
  return agg;
}

EvalReport run_eval(std::span<const QARecord> dataset, const Pipeline& pipeline, const KnowledgeGraph& kg,
                    const EvalOptions& options) {
  if (dataset.empty()) throw Error("evaluation dataset is empty");
  const MatchPolicy policy;
  EvalReport report;
  report.rows.resize(dataset.size());

  auto run_one = [&](std::size_t i) {
    const auto& rec = dataset[i];
    auto& row = report.rows[i];
    row.id = rec.id;
    row.gold = rec.answers;
    const auto start = std::chrono::steady_clock::now();
    try {
      auto outcome = pipeline(rec);
      row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      row.predictions = outcome.final.answers;
      row.no_grounded_evidence = outcome.no_grounded_evidence;
      row.llm_calls = outcome.trace.llm_calls();
      row.llm_tokens = outcome.trace.llm_tokens();
      for (const auto& r : outcome.final.provenance) row.paths.push_back(r.path_text);

      std::vector<std::string> scored = row.predictions;
      if (!rec.choices.empty()) {
        row.multiple_choice = true;
        scored.clear();
        for (const auto& p : row.predictions) {
          if (auto label = match_choice(p, rec.choices, policy)) scored.push_back(*label);
        }
        if (!row.predictions.empty()) {
          row.predicted_label = match_choice(row.predictions.front(), rec.choices, policy)
                                    .value_or(row.predictions.front());
        }
        row.label_correct = row.predicted_label && !rec.answers.empty() && *row.predicted_label == rec.answers.front();
      }
      row.hit = hit(scored, rec.answers, policy);
      const auto m = prf1(scored, rec.answers, policy);
      row.precision = m.precision;
      row.recall = m.recall;
      row.f1 = m.f1;
      if (!row.paths.empty()) {
        std::size_t grounded = 0;
        for (const auto& p : row.paths) grounded += parse_path(kg, p).status == PathStatus::kGrounded;
        row.faithful = static_cast<double>(grounded) / static_cast<double>(row.paths.size());
      }
    } catch (const PipelineError& e) {
      row.failed = true;
      row.error = e.what();
      row.runtime_seconds = e.trace().total_seconds;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    if (row.failed) spdlog::warn("record '{}' failed: {}", row.id, row.error);
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(dataset.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < dataset.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < dataset.size(); i = next++) run_one(i);
      });
    }
  }

  std::vector<McqRow> mcq;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& rec = dataset[i];
    const auto& row = report.rows[i];
    if (!row.multiple_choice || row.failed) continue;
    McqRow m{row.predicted_label.value_or(""), rec.answers.front(), {}};
    for (const auto& c : rec.choices) m.labels.push_back(c.label);
    mcq.push_back(std::move(m));
  }
  if (const auto score = mcq_accuracy(mcq); score.invalid_predictions) {
    spdlog::warn("{} multiple-choice predictions were not among the choices", score.invalid_predictions);
  }
  report.aggregates = aggregate(report.rows, kg);
  return report;
}

nlohmann::ordered_json EvalReport::to_json(bool include_timings) const {
  using J = nlohmann::ordered_json;
  const auto& a = aggregates;
  J agg;
  agg["questions"] = a.questions;
  agg["evaluated"] = a.evaluated;
  agg["failures"] = a.failures;
  agg["hit"] = a.hit;
  agg["precision"] = a.precision;
  agg["recall"] = a.recall;
  agg["f1"] = a.f1;
  agg["accuracy"] = optional_json(a.accuracy);
  agg["faithful_ratio"] = optional_json(a.faithful_ratio);
  if (include_timings) agg["avg_runtime_seconds"] = a.avg_runtime_seconds;
  agg["avg_llm_calls"] = a.avg_llm_calls;
  agg["avg_llm_tokens"] = a.avg_llm_tokens;

  J rows_json = J::array();
  for (const auto& r : rows) {
    J row;
    row["id"] = r.id;
    row["predictions"] = r.predictions;
    row["gold"] = r.gold;
    row["paths"] = r.paths;
    row["hit"] = r.hit;
    row["precision"] = r.precision;
    row["recall"] = r.recall;
    row["f1"] = r.f1;
    row["faithful"] = optional_json(r.faithful);
    if (r.multiple_choice) {
      row["predicted_label"] = r.predicted_label ? J(*r.predicted_label) : J(nullptr);
      row["label_correct"] = r.label_correct;
    }
    row["no_grounded_evidence"] = r.no_grounded_evidence;
    if (include_timings) row["runtime_seconds"] = r.runtime_seconds;
    row["llm_calls"] = r.llm_calls;
    row["llm_tokens"] = r.llm_tokens;
    row["failed"] = r.failed;
    if (r.failed) row["error"] = r.error;
    rows_json.push_back(std::move(row));
  }
  return J{{"aggregates", std::move(agg)}, {"rows", std::move(rows_json)}};
}

std::string EvalReport::summary() const {
  const auto& a = aggregates;
  auto pct = [](double x) { return fmt::format("{:.2f}", 100 * x); };
  auto opt_pct = [&](const std::optional<double>& x) { return x ? pct(*x) : std::string("NA"); };
  std::string out;
  out += fmt::format("{:<22}{:>12}\n", "metric", "value");
  out += fmt::format("{:<22}{:>12}\n", "questions", a.questions);
  out += fmt::format("{:<22}{:>12}\n", "failures", a.failures);
  out += fmt::format("{:<22}{:>12}\n", "Hit (%)", pct(a.hit));
  out += fmt::format("{:<22}{:>12}\n", "Precision (%)", pct(a.precision));
  out += fmt::format("{:<22}{:>12}\n", "Recall (%)", pct(a.recall));
  out += fmt::format("{:<22}{:>12}\n", "F1 (%)", pct(a.f1));
  out += fmt::format("{:<22}{:>12}\n", "Accuracy (%)", opt_pct(a.accuracy));
  out += fmt::format("{:<22}{:>12}\n", "Faithful ratio (%)", opt_pct(a.faithful_ratio));
  out += fmt::format("{:<22}{:>12.3f}\n", "Avg runtime (s)", a.avg_runtime_seconds);
  out += fmt::format("{:<22}{:>12.2f}\n", "Avg LLM calls", a.avg_llm_calls);
  out += fmt::format("{:<22}{:>12.1f}\n", "Avg LLM tokens", a.avg_llm_tokens);
  return out;
}

}  // namespace gcr
