#include "gcr/trainset.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "gcr/reasoner.hpp"

namespace gcr {

namespace {

struct RecordOutput {
  std::vector<TrainInstance> instances;
  std::size_t zero_hop = 0;
  std::size_t unresolved_answers = 0;
  std::size_t unresolved_entities = 0;
  std::size_t unreachable_pairs = 0;
};

RecordOutput generate_for(const KnowledgeGraph& kg, const QARecord& rec, std::size_t cap) {
  RecordOutput out;
  std::vector<EntityId> sources;
  std::vector<std::string> linked;
  for (const auto& name : rec.question_entities) {
    if (auto id = kg.find_entity(name)) {
      sources.push_back(*id);
      linked.push_back(name);
    } else {
      ++out.unresolved_entities;
    }
  }
  if (sources.empty() || rec.question.empty()) return out;
  const auto prompt = render_generation_prompt(rec.question, rec.question_entities);

  for (const auto& answer : rec.answers) {
    const auto dst = kg.find_entity(answer);
    if (!dst) {
      ++out.unresolved_answers;
      continue;
    }
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const auto paths = shortest_paths(kg, sources[s], *dst, cap);
      if (paths.empty()) ++out.unreachable_pairs;
      for (const auto& p : paths) {
        TrainInstance inst;
        inst.question = rec.question;
        if (p.hops() == 0) {
          ++out.zero_hop;
        } else {
          inst.path = format_path(kg, p);
        }
        inst.answer = answer;
        inst.prompt = prompt;
        inst.target = render_generation_target(inst.path, answer);
        inst.record_id = rec.id;
        inst.src = linked[s];
        inst.dst = answer;
        out.instances.push_back(std::move(inst));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<TrainInstance> generate_instances(const KnowledgeGraph& kg, std::span<const QARecord> records,
                                              const TrainOptions& options, TrainStats* stats) {
  std::vector<RecordOutput> parts(records.size());
  const unsigned jobs =
      std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(std::max<std::size_t>(records.size(), 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) parts[i] = generate_for(kg, records[i], options.cap_per_pair);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
          parts[i] = generate_for(kg, records[i], options.cap_per_pair);
        }
      });
    }
  }

  TrainStats local;
  local.records = records.size();
  std::vector<TrainInstance> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (auto& part : parts) {
    std::size_t kept = 0;
    for (auto& inst : part.instances) {
      if (!seen.emplace(inst.question, inst.path, inst.answer).second) {
        ++local.duplicates;
        continue;
      }
      out.push_back(std::move(inst));
      ++kept;
    }
    local.per_record.push_back(kept);
    local.zero_hop += part.zero_hop;
    local.unresolved_answers += part.unresolved_answers;
    local.unresolved_entities += part.unresolved_entities;
    local.unreachable_pairs += part.unreachable_pairs;
  }
  local.instances = out.size();
  if (local.unresolved_answers) spdlog::info("skipped {} answers not found in the KG", local.unresolved_answers);
  if (stats) *stats = std::move(local);
  return out;
}

void write_instances(std::ostream& out, std::span<const TrainInstance> instances) {
  for (const auto& inst : instances) {
    nlohmann::ordered_json j;
    j["question"] = inst.question;
    j["path"] = inst.path;
    j["answer"] = inst.answer;
    j["prompt"] = inst.prompt;
    j["target"] = inst.target;
    j["meta"] = {{"record_id", inst.record_id}, {"src", inst.src}, {"dst", inst.dst}};
    out << j.dump() << '\n';
  }
}

}  // namespace gcr
