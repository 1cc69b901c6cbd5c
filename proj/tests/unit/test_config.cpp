#include <sstream>

#include "doctest.h"
#include "gcr/config.hpp"
#include "gcr/errors.hpp"

using namespace gcr;

TEST_SUITE("config") {
  TEST_CASE("parse settings") {
    std::istringstream in("# comment\nhops = 3\n\nchat-model=m1\n");
    const auto s = parse_settings(in);
    CHECK(s.at("hops") == "3");
    CHECK(s.at("chat_model") == "m1");
    std::istringstream bad("no equals sign\n");
    CHECK_THROWS(parse_settings(bad));
  }

  TEST_CASE("layers apply in order") {
    RunConfig c;
    CHECK(c.hops == 2);
    CHECK(c.beam == 10);
    apply_settings(c, {{"hops", "3"}, {"beam", "4"}});
    const auto env = env_settings([](const char* name) -> const char* {
      return std::string(name) == "GCR_HOPS" ? "1" : nullptr;
    });
    CHECK(env.size() == 1);
    apply_settings(c, env);
    apply_settings(c, {{"beam", "7"}});
    CHECK(c.hops == 1);
    CHECK(c.beam == 7);
  }

  TEST_CASE("bad keys and numbers") {
    RunConfig c;
    CHECK_THROWS_AS(apply_settings(c, {{"colour", "red"}}), ConfigError);
    CHECK_THROWS_AS(apply_settings(c, {{"hops", "two"}}), ConfigError);
    CHECK_THROWS_AS(apply_settings(c, {{"beam", "5x"}}), ConfigError);
    CHECK_THROWS_AS(read_settings_file("/nonexistent/gcr.conf"), ConfigError);
  }
}
