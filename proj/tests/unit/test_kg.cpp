#include <random>
#include <sstream>

#include "doctest.h"
#include "gcr/errors.hpp"
#include "gcr/kg.hpp"
#include "support/fixtures.hpp"

using namespace gcr;
using gcr::testing::NamedPath;

TEST_SUITE("kg") {
  TEST_CASE("load_kg counts the toy graph") {
    std::istringstream in(gcr::testing::t1_tsv());
    const auto kg = load_kg(in);
    CHECK(kg.n_entities() == 5);
    CHECK(kg.n_relations() == 3);
    CHECK(kg.n_triples() == 5);
  }

  TEST_CASE("load_kg handles empty input, comments and duplicates") {
    std::istringstream empty("");
    CHECK(load_kg(empty).n_triples() == 0);

    std::istringstream dup("# header comment\nA\tr1\tB\n\nA\tr1\tB\n");
    const auto kg = load_kg(dup);
    CHECK(kg.n_triples() == 1);
    CHECK(kg.out_edges(kg.entity("A")).size() == 1);
  }

  TEST_CASE("load_kg reports the malformed line") {
    std::istringstream in("A\tr1\tB\nA\tr1\n");
    try {
      load_kg(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    std::istringstream four("A\tr1\tB\tx\n");
    CHECK_THROWS_AS(load_kg(four), ParseError);
  }

  TEST_CASE("surface strings are case sensitive and kept verbatim") {
    KnowledgeGraph kg;
    kg.add_triple("Justin Bieber", "people.person.parents", "Jeremy Bieber");
    kg.add_triple("justin bieber", "people.person.parents", "Jeremy Bieber");
    CHECK(kg.n_entities() == 3);
    CHECK(kg.find_entity("Justin Bieber").has_value());
    CHECK_FALSE(kg.find_entity("JUSTIN BIEBER").has_value());
  }

  TEST_CASE("enumerate_paths on the toy graph") {
    const auto kg = gcr::testing::t1_graph();
    const std::vector<std::string> a{"A"};
    const auto two = gcr::testing::to_named_set(kg, enumerate_paths(kg, a, 2));
    const std::set<NamedPath> expected{{"A", "r1", "B"},
                                       {"A", "r3", "D"},
                                       {"A", "r1", "B", "r2", "C"},
                                       {"A", "r1", "B", "r2", "E"},
                                       {"A", "r3", "D", "r2", "C"}};
    CHECK(two == expected);

    const auto one = gcr::testing::to_named_set(kg, enumerate_paths(kg, a, 1));
    CHECK(one == std::set<NamedPath>{{"A", "r1", "B"}, {"A", "r3", "D"}});

    const std::vector<std::string> c{"C"};
    CHECK(enumerate_paths(kg, c, 2).empty());
  }

  TEST_CASE("enumerate_paths rejects bad arguments") {
    const auto kg = gcr::testing::t1_graph();
    const std::vector<std::string> missing{"Z"};
    CHECK_THROWS_AS(enumerate_paths(kg, missing, 2), UnknownEntityError);
    const std::vector<std::string> a{"A"};
    CHECK_THROWS_AS(enumerate_paths(kg, a, 0), ConfigError);
  }

  TEST_CASE("enumerate_paths allows revisits") {
    KnowledgeGraph kg;
    kg.add_triple("A", "r", "B");
    kg.add_triple("B", "s", "A");
    const std::vector<std::string> a{"A"};
    const auto paths = gcr::testing::to_named_set(kg, enumerate_paths(kg, a, 3));
    CHECK(paths.contains(NamedPath{"A", "r", "B", "s", "A", "r", "B"}));
    CHECK(paths.size() == 3);
  }

  TEST_CASE("format_path and parse_path") {
    KnowledgeGraph fig;
    fig.add_triple("Justin Bieber", "people.person.parents", "Jeremy Bieber");
    fig.add_triple("Jeremy Bieber", "people.person.children", "Jaxon Bieber");
    const std::vector<std::string> jb{"Justin Bieber"};
    const auto paths = enumerate_paths(fig, jb, 2);
    REQUIRE(paths.size() == 2);
    CHECK(format_path(fig, paths[1]) ==
          "<PATH> Justin Bieber \xE2\x86\x92 people.person.parents \xE2\x86\x92 Jeremy Bieber \xE2\x86\x92 "
          "people.person.children \xE2\x86\x92 Jaxon Bieber </PATH>");

    const auto kg = gcr::testing::t1_graph();
    const std::vector<std::string> a{"A"};
    for (const auto& p : enumerate_paths(kg, a, 2)) {
      const auto check = parse_path(kg, format_path(kg, p));
      REQUIRE(check.grounded());
      CHECK(*check.path == p);
    }
    CHECK(format_path(kg, enumerate_paths(kg, a, 1).front()) == "<PATH> A \xE2\x86\x92 r1 \xE2\x86\x92 B </PATH>");
  }

  TEST_CASE("parse_path distinguishes ungrounded from malformed") {
    const auto kg = gcr::testing::t1_graph();
    const auto ok = parse_path(kg, "<PATH> A \xE2\x86\x92 r1 \xE2\x86\x92 B </PATH>");
    CHECK(ok.status == PathStatus::kGrounded);

    const auto missing = parse_path(kg, "<PATH> A \xE2\x86\x92 r2 \xE2\x86\x92 B </PATH>");
    CHECK(missing.status == PathStatus::kUngrounded);
    REQUIRE(missing.missing.has_value());
    CHECK(kg.entity_name(missing.missing->head) == "A");
    CHECK(kg.relation_name(missing.missing->relation) == "r2");
    CHECK(kg.entity_name(missing.missing->tail) == "B");

    CHECK(parse_path(kg, "<PATH> A \xE2\x86\x92 r1 </PATH>").status == PathStatus::kMalformed);
    CHECK(parse_path(kg, "A \xE2\x86\x92 r1 \xE2\x86\x92 B").status == PathStatus::kMalformed);
    const auto unknown = parse_path(kg, "<PATH> A \xE2\x86\x92 r9 \xE2\x86\x92 B </PATH>");
    CHECK(unknown.status == PathStatus::kMalformed);
    CHECK(unknown.detail.find("r9") != std::string::npos);
    CHECK(parse_path(kg, "<PATH> Q \xE2\x86\x92 r1 \xE2\x86\x92 B </PATH>").status == PathStatus::kMalformed);
  }

  TEST_CASE("shortest_paths on the toy graph") {
    const auto kg = gcr::testing::t1_graph();
    const auto ac = gcr::testing::to_named_set(kg, shortest_paths(kg, kg.entity("A"), kg.entity("C")));
    CHECK(ac == std::set<NamedPath>{{"A", "r1", "B", "r2", "C"}, {"A", "r3", "D", "r2", "C"}});
    const auto ab = shortest_paths(kg, kg.entity("A"), kg.entity("B"));
    REQUIRE(ab.size() == 1);
    CHECK(gcr::testing::to_named(kg, ab[0]) == NamedPath{"A", "r1", "B"});
    CHECK(shortest_paths(kg, kg.entity("C"), kg.entity("A")).empty());
    CHECK(shortest_paths(kg, kg.entity("A"), kg.entity("C"), 1).size() == 1);

    const auto self = shortest_paths(kg, kg.entity("A"), kg.entity("A"));
    REQUIRE(self.size() == 1);
    CHECK(self[0].hops() == 0);
  }

  TEST_CASE("random graphs match the DFS oracle and stay grounded") {
    std::mt19937_64 rng(7);
    for (int g = 0; g < 30; ++g) {
      const auto kg = gcr::testing::random_graph(rng, {15, 3, 35});
      const std::vector<std::string> starts{"e0", "e3"};
      std::set<NamedPath> previous;
      for (int hops = 1; hops <= 3; ++hops) {
        const auto paths = enumerate_paths(kg, starts, hops);
        const auto named = gcr::testing::to_named_set(kg, paths);
        CHECK(named == gcr::testing::brute_force_paths(kg, starts, hops));
        CHECK(std::includes(named.begin(), named.end(), previous.begin(), previous.end()));
        previous = named;
        for (const auto& p : paths) CHECK(parse_path(kg, format_path(kg, p)).grounded());
      }
    }
  }

  TEST_CASE("path count respects the out-degree bound") {
    std::mt19937_64 rng(11);
    const auto kg = gcr::testing::random_graph(rng, {10, 2, 40});
    const std::vector<std::string> start{"e1"};
    const double d = static_cast<double>(kg.max_out_degree());
    for (int hops = 1; hops <= 3; ++hops) {
      double bound = 0;
      for (int i = 1; i <= hops; ++i) bound += std::pow(d, i);
      CHECK(static_cast<double>(enumerate_paths(kg, start, hops).size()) <= bound);
    }
  }
}
