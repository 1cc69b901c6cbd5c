#pragma once

#include <cstdint>
#include <compare>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gcr {

struct EntityId {
  std::uint32_t value = 0;
  auto operator<=>(const EntityId&) const = default;
};

struct RelationId {
  std::uint32_t value = 0;
  auto operator<=>(const RelationId&) const = default;
};

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;
  auto operator<=>(const Triple&) const = default;
};

// One outgoing edge in the adjacency index.
struct Edge {
  RelationId relation;
  EntityId tail;
  auto operator<=>(const Edge&) const = default;
};

struct PathStep {
  RelationId relation;
  EntityId entity;
  auto operator<=>(const PathStep&) const = default;
};

// e0 -r1-> e1 -r2-> ... -rl-> el. hops() == 0 only for the degenerate
// "answer is a question entity" case produced by shortest_paths(src, src).
struct ReasoningPath {
  EntityId start;
  std::vector<PathStep> steps;

  std::size_t hops() const noexcept { return steps.size(); }
  EntityId end() const noexcept { return steps.empty() ? start : steps.back().entity; }
  auto operator<=>(const ReasoningPath&) const = default;
};

class KnowledgeGraph {
 public:
  EntityId intern_entity(std::string_view name);
  RelationId intern_relation(std::string_view name);

  // Returns true if the triple was new.
  bool add_triple(std::string_view head, std::string_view relation, std::string_view tail);
  bool add_triple(const Triple& t);

  std::optional<EntityId> find_entity(std::string_view name) const;
  std::optional<RelationId> find_relation(std::string_view name) const;
  // Throws UnknownEntityError.
  EntityId entity(std::string_view name) const;

  const std::string& entity_name(EntityId id) const { return entities_.at(id.value); }
  const std::string& relation_name(RelationId id) const { return relations_.at(id.value); }

  bool contains(const Triple& t) const;
  bool contains(EntityId head, RelationId relation, EntityId tail) const {
    return contains(Triple{head, relation, tail});
  }

  // Outgoing edges sorted by (relation, tail).
  std::span<const Edge> out_edges(EntityId e) const;
  // Incoming edges as (relation, head), sorted.
  std::span<const Edge> in_edges(EntityId e) const;

  std::size_t n_entities() const noexcept { return entities_.size(); }
  std::size_t n_relations() const noexcept { return relations_.size(); }
  std::size_t n_triples() const noexcept { return triple_set_.size(); }
  std::size_t max_out_degree() const noexcept;

  std::vector<Triple> triples() const;

 private:
  struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept;
  };

  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
  std::unordered_set<Triple, TripleHash> triple_set_;
  std::vector<std::vector<Edge>> out_;
  std::vector<std::vector<Edge>> in_;
};

// Reads `head<TAB>relation<TAB>tail` rows. Blank and '#'-prefixed lines are
// skipped; any other row without exactly three fields throws ParseError.
KnowledgeGraph load_kg(std::istream& in);
KnowledgeGraph load_kg_file(const std::filesystem::path& path);

// All grounded paths of 1..max_hops hops from any start entity, sorted and
// unique. Revisiting entities is allowed; only forward edges are followed.
std::vector<ReasoningPath> enumerate_paths(const KnowledgeGraph& kg, std::span<const EntityId> starts,
                                           int max_hops);
std::vector<ReasoningPath> enumerate_paths(const KnowledgeGraph& kg, std::span<const std::string> starts,
                                           int max_hops);

inline constexpr std::string_view kPathOpen = "<PATH>";
inline constexpr std::string_view kPathClose = "</PATH>";
inline constexpr std::string_view kArrow = "\xE2\x86\x92";  // U+2192

std::string format_path(const KnowledgeGraph& kg, const ReasoningPath& path);

enum class PathStatus { kGrounded, kUngrounded, kMalformed };

struct PathCheck {
  PathStatus status = PathStatus::kMalformed;
  std::optional<ReasoningPath> path;  // set iff grounded
  std::optional<Triple> missing;      // first triple absent from the graph
  std::string detail;

  bool grounded() const noexcept { return status == PathStatus::kGrounded; }
};

PathCheck parse_path(const KnowledgeGraph& kg, std::string_view text);

inline constexpr std::size_t kDefaultShortestPathCap = 10;

// All minimum-length forward paths src -> dst in lexicographic (relation, entity)
// order, truncated to `cap`. src == dst yields the single zero-hop path.
std::vector<ReasoningPath> shortest_paths(const KnowledgeGraph& kg, EntityId src, EntityId dst,
                                          std::size_t cap = kDefaultShortestPathCap);

}  // namespace gcr
