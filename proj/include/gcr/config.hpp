#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gcr {

struct RunConfig {
  std::string kg;
  std::string qa;
  std::string vocab;
  std::string trie;
  std::string out;
  std::uint32_t hops = 2;
  std::size_t beam = 10;
  std::size_t max_answer_tokens = 64;
  std::string scorer = "uniform";  // uniform | table JSON file | http(s) URL
  std::string scorer_key;
  std::string chat = "stub:majority";  // stub:majority | stub:FILE | URL
  std::string chat_endpoint;
  std::string chat_model = "gpt-4o-mini";
  std::string chat_key;
  std::size_t cache_capacity = 1024;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  double timeout_seconds = 60;
  int retries = 3;
};

using Settings = std::map<std::string, std::string>;

// Flat key=value lines; '#' starts a comment line. Throws ConfigError.
Settings parse_settings(std::istream& in);
Settings read_settings_file(const std::filesystem::path& path);

// GCR_<KEY> variables for every known key, e.g. GCR_HOPS or GCR_CHAT_ENDPOINT.
Settings env_settings(const std::function<const char*(const char*)>& getenv_fn);

const std::vector<std::string>& known_setting_keys();

// Applies in order; later layers win. Unknown keys and bad numbers throw ConfigError.
void apply_settings(RunConfig& config, const Settings& settings);

}  // namespace gcr
