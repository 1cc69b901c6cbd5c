#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gcr/dataset.hpp"
#include "gcr/kg.hpp"

namespace gcr {

struct TrainInstance {
  std::string question;
  std::string path;  // empty when the answer is itself a question entity
  std::string answer;
  std::string prompt;
  std::string target;
  std::string record_id;
  std::string src;
  std::string dst;
};

struct TrainStats {
  std::size_t records = 0;
  std::size_t instances = 0;
  std::size_t zero_hop = 0;
  std::size_t unresolved_answers = 0;  // answer not an entity of the KG
  std::size_t unresolved_entities = 0;
  std::size_t unreachable_pairs = 0;
  std::size_t duplicates = 0;
  std::vector<std::size_t> per_record;
};

struct TrainOptions {
  std::size_t cap_per_pair = kDefaultShortestPathCap;
  unsigned jobs = 1;
};

// One instance per shortest path for every (question entity, answer entity)
// pair, in input order. Exact (question, path, answer) duplicates are dropped.
std::vector<TrainInstance> generate_instances(const KnowledgeGraph& kg, std::span<const QARecord> records,
                                              const TrainOptions& options, TrainStats* stats = nullptr);

// JSON lines: question, path, answer, prompt, target, meta{record_id, src, dst}.
void write_instances(std::ostream& out, std::span<const TrainInstance> instances);

}  // namespace gcr
