// gcr: command-line front end for the graph-constrained reasoning pipeline.
// Exit codes: 0 ok, 1 pipeline failure, 2 usage or configuration error.

#include <algorithm>
#include <cstdlib>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "gcr/commands.hpp"

using namespace gcr;

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("gcr"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Graph-constrained reasoning over a knowledge graph"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  bool verbose = false;
  app.add_option("--config", config_file, "key=value settings file (also GCR_CONFIG)");
  app.add_flag("-v,--verbose", verbose, "debug logging");

  // Every setting is also a flag. Only flags actually given override lower layers.
  Settings flag_values;
  std::vector<std::pair<std::string, CLI::Option*>> setting_opts;
  for (const auto& key : known_setting_keys()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    setting_opts.emplace_back(key, app.add_option("--" + flag, flag_values[key]));
  }

  std::vector<std::string> entities;
  std::string question;
  bool no_timings = false;
  auto add_question = [&](CLI::App* sub, bool with_question) {
    sub->add_option("-e,--entity", entities, "question entity (repeatable)");
    if (with_question) sub->add_option("-q,--question", question, "question text");
  };

  auto* build = app.add_subcommand("build-trie", "build a question trie and print its stats");
  add_question(build, false);
  auto* dec = app.add_subcommand("decode", "constrained beam search for reasoning paths");
  add_question(dec, true);
  auto* ans = app.add_subcommand("answer", "answer one question end to end");
  add_question(ans, true);
  auto* ev = app.add_subcommand("eval", "evaluate a QA dataset");
  ev->add_flag("--no-timings", no_timings, "omit timing fields from the JSON report");
  auto* gen = app.add_subcommand("gen-train", "write fine-tuning instances as JSON lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    Settings given;
    for (const auto& [key, opt] : setting_opts) {
      if (opt->count() > 0) given[key] = flag_values[key];
    }
    const auto cfg = resolve_config(config_file, [](const char* n) { return std::getenv(n); }, given);

    if (*build) cmd_build_trie(cfg, entities, std::cout);
    if (*dec) cmd_decode(cfg, question, entities, std::cout);
    if (*ans) cmd_answer(cfg, question, entities, std::cout);
    if (*gen) cmd_gen_train(cfg, std::cout);
    if (*ev) {
      const auto report = cmd_eval(cfg, !no_timings, std::cout);
      if (report.aggregates.evaluated == 0) return kExitPipelineFailure;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e);
  }
  return kExitOk;
}
