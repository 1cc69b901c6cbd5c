#include "gcr/kg.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <limits>

#include "gcr/errors.hpp"

namespace gcr {

namespace {

constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

void insert_sorted(std::vector<Edge>& edges, Edge e) {
  edges.insert(std::lower_bound(edges.begin(), edges.end(), e), e);
}

std::vector<std::uint32_t> bfs_distances(const KnowledgeGraph& kg, EntityId from, bool forward) {
  std::vector<std::uint32_t> dist(kg.n_entities(), kUnreached);
  std::deque<EntityId> queue{from};
  dist[from.value] = 0;
  while (!queue.empty()) {
    EntityId u = queue.front();
    queue.pop_front();
    for (const Edge& e : forward ? kg.out_edges(u) : kg.in_edges(u)) {
      if (dist[e.tail.value] == kUnreached) {
        dist[e.tail.value] = dist[u.value] + 1;
        queue.push_back(e.tail);
      }
    }
  }
  return dist;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::size_t KnowledgeGraph::TripleHash::operator()(const Triple& t) const noexcept {
  std::uint64_t h = t.head.value;
  h = h * 0x9E3779B97F4A7C15ULL ^ t.relation.value;
  h = h * 0x9E3779B97F4A7C15ULL ^ t.tail.value;
  return static_cast<std::size_t>(h ^ (h >> 29));
}

EntityId KnowledgeGraph::intern_entity(std::string_view name) {
  std::string key(name);
  if (auto it = entity_index_.find(key); it != entity_index_.end()) return it->second;
  EntityId id{static_cast<std::uint32_t>(entities_.size())};
  entities_.push_back(key);
  entity_index_.emplace(std::move(key), id);
  out_.emplace_back();
  in_.emplace_back();
  return id;
}

RelationId KnowledgeGraph::intern_relation(std::string_view name) {
  std::string key(name);
  if (auto it = relation_index_.find(key); it != relation_index_.end()) return it->second;
  RelationId id{static_cast<std::uint32_t>(relations_.size())};
  relations_.push_back(key);
  relation_index_.emplace(std::move(key), id);
  return id;
}

bool KnowledgeGraph::add_triple(std::string_view head, std::string_view relation, std::string_view tail) {
  const EntityId h = intern_entity(head);
  const RelationId r = intern_relation(relation);
  const EntityId t = intern_entity(tail);
  return add_triple(Triple{h, r, t});
}

bool KnowledgeGraph::add_triple(const Triple& t) {
  if (t.head.value >= entities_.size() || t.tail.value >= entities_.size() ||
      t.relation.value >= relations_.size()) {
    throw Error("triple references an id that is not interned");
  }
  if (!triple_set_.insert(t).second) return false;
  insert_sorted(out_[t.head.value], Edge{t.relation, t.tail});
  insert_sorted(in_[t.tail.value], Edge{t.relation, t.head});
  return true;
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view name) const {
  auto it = entity_index_.find(std::string(name));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

EntityId KnowledgeGraph::entity(std::string_view name) const {
  if (auto id = find_entity(name)) return *id;
  throw UnknownEntityError(std::string(name));
}

bool KnowledgeGraph::contains(const Triple& t) const { return triple_set_.contains(t); }

std::span<const Edge> KnowledgeGraph::out_edges(EntityId e) const { return out_.at(e.value); }

std::span<const Edge> KnowledgeGraph::in_edges(EntityId e) const { return in_.at(e.value); }

std::size_t KnowledgeGraph::max_out_degree() const noexcept {
  std::size_t best = 0;
  for (const auto& edges : out_) best = std::max(best, edges.size());
  return best;
}

std::vector<Triple> KnowledgeGraph::triples() const {
  std::vector<Triple> all;
  all.reserve(triple_set_.size());
  for (std::uint32_t h = 0; h < out_.size(); ++h) {
    for (const Edge& e : out_[h]) all.push_back(Triple{EntityId{h}, e.relation, e.tail});
  }
  return all;
}

KnowledgeGraph load_kg(std::istream& in) {
  KnowledgeGraph kg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::string_view row(line);
    const auto t1 = row.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : row.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || row.find('\t', t2 + 1) != std::string_view::npos) {
      throw ParseError("expected 3 tab-separated fields", line_no);
    }
    const auto head = row.substr(0, t1);
    const auto rel = row.substr(t1 + 1, t2 - t1 - 1);
    const auto tail = row.substr(t2 + 1);
    if (head.empty() || rel.empty() || tail.empty()) throw ParseError("empty field", line_no);
    kg.add_triple(head, rel, tail);
  }
  return kg;
}

KnowledgeGraph load_kg_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open KG file: " + path.string());
  return load_kg(in);
}

std::vector<ReasoningPath> enumerate_paths(const KnowledgeGraph& kg, std::span<const EntityId> starts,
                                           int max_hops) {
  if (max_hops < 1) throw ConfigError("max_hops must be >= 1");
  std::vector<EntityId> roots(starts.begin(), starts.end());
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  for (EntityId e : roots) {
    if (e.value >= kg.n_entities()) throw UnknownEntityError("#" + std::to_string(e.value));
  }

  std::vector<ReasoningPath> result;
  std::vector<ReasoningPath> frontier;
  for (EntityId e : roots) frontier.push_back(ReasoningPath{e, {}});
  for (int hop = 1; hop <= max_hops && !frontier.empty(); ++hop) {
    std::vector<ReasoningPath> next;
    for (const ReasoningPath& p : frontier) {
      for (const Edge& e : kg.out_edges(p.end())) {
        ReasoningPath extended = p;
        extended.steps.push_back(PathStep{e.relation, e.tail});
        next.push_back(std::move(extended));
      }
    }
    result.insert(result.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<ReasoningPath> enumerate_paths(const KnowledgeGraph& kg, std::span<const std::string> starts,
                                           int max_hops) {
  std::vector<EntityId> ids;
  ids.reserve(starts.size());
  for (const auto& name : starts) ids.push_back(kg.entity(name));
  return enumerate_paths(kg, ids, max_hops);
}

std::string format_path(const KnowledgeGraph& kg, const ReasoningPath& path) {
  std::string out(kPathOpen);
  out += ' ';
  out += kg.entity_name(path.start);
  for (const PathStep& s : path.steps) {
    out += ' ';
    out += kArrow;
    out += ' ';
    out += kg.relation_name(s.relation);
    out += ' ';
    out += kArrow;
    out += ' ';
    out += kg.entity_name(s.entity);
  }
  out += ' ';
  out += kPathClose;
  return out;
}

PathCheck parse_path(const KnowledgeGraph& kg, std::string_view text) {
  PathCheck check;
  auto body = trim(text);
  if (!body.starts_with(kPathOpen) || !body.ends_with(kPathClose) ||
      body.size() < kPathOpen.size() + kPathClose.size()) {
    check.detail = "missing <PATH>/</PATH> markers";
    return check;
  }
  body = trim(body.substr(kPathOpen.size(), body.size() - kPathOpen.size() - kPathClose.size()));

  std::vector<std::string_view> parts;
  const std::string sep = " " + std::string(kArrow) + " ";
  while (true) {
    const auto pos = body.find(sep);
    parts.push_back(body.substr(0, pos));
    if (pos == std::string_view::npos) break;
    body = body.substr(pos + sep.size());
  }
  if (parts.size() < 3 || parts.size() % 2 == 0) {
    check.detail = "truncated path: expected entity (relation entity)+, got " + std::to_string(parts.size()) +
                   " elements";
    return check;
  }
  if (std::any_of(parts.begin(), parts.end(), [](std::string_view p) { return p.empty(); })) {
    check.detail = "empty path element";
    return check;
  }

  ReasoningPath path;
  auto start = kg.find_entity(parts[0]);
  if (!start) {
    check.detail = "unknown entity '" + std::string(parts[0]) + "'";
    return check;
  }
  path.start = *start;
  for (std::size_t i = 1; i < parts.size(); i += 2) {
    auto rel = kg.find_relation(parts[i]);
    if (!rel) {
      check.detail = "unknown relation '" + std::string(parts[i]) + "'";
      return check;
    }
    auto ent = kg.find_entity(parts[i + 1]);
    if (!ent) {
      check.detail = "unknown entity '" + std::string(parts[i + 1]) + "'";
      return check;
    }
    path.steps.push_back(PathStep{*rel, *ent});
  }

  EntityId prev = path.start;
  for (const PathStep& s : path.steps) {
    Triple t{prev, s.relation, s.entity};
    if (!kg.contains(t)) {
      check.status = PathStatus::kUngrounded;
      check.missing = t;
      check.detail = "missing triple (" + kg.entity_name(t.head) + ", " + kg.relation_name(t.relation) + ", " +
                     kg.entity_name(t.tail) + ")";
      return check;
    }
    prev = s.entity;
  }
  check.status = PathStatus::kGrounded;
  check.path = std::move(path);
  return check;
}

std::vector<ReasoningPath> shortest_paths(const KnowledgeGraph& kg, EntityId src, EntityId dst, std::size_t cap) {
  if (src.value >= kg.n_entities()) throw UnknownEntityError("#" + std::to_string(src.value));
  if (dst.value >= kg.n_entities()) throw UnknownEntityError("#" + std::to_string(dst.value));
  if (cap == 0) return {};
  if (src == dst) return {ReasoningPath{src, {}}};

  const auto from_src = bfs_distances(kg, src, true);
  const std::uint32_t length = from_src[dst.value];
  if (length == kUnreached) return {};
  const auto to_dst = bfs_distances(kg, dst, false);

  // Depth-first over the shortest-path DAG; adjacency order gives lexicographic output.
  std::vector<ReasoningPath> result;
  ReasoningPath current{src, {}};
  struct Frame {
    EntityId node;
    std::size_t next_edge;
  };
  std::vector<Frame> stack{{src, 0}};
  while (!stack.empty() && result.size() < cap) {
    Frame& top = stack.back();
    const auto edges = kg.out_edges(top.node);
    if (top.node == dst) {
      result.push_back(current);
      stack.pop_back();
      if (!current.steps.empty()) current.steps.pop_back();
      continue;
    }
    bool descended = false;
    while (top.next_edge < edges.size()) {
      const Edge& e = edges[top.next_edge++];
      const auto depth = static_cast<std::uint32_t>(current.steps.size());
      if (to_dst[e.tail.value] != kUnreached && depth + 1 + to_dst[e.tail.value] == length) {
        current.steps.push_back(PathStep{e.relation, e.tail});
        stack.push_back(Frame{e.tail, 0});
        descended = true;
        break;
      }
    }
    if (!descended) {
      stack.pop_back();
      if (!current.steps.empty()) current.steps.pop_back();
    }
  }
  return result;
}

}  // namespace gcr
