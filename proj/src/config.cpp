#include "gcr/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>

#include "gcr/errors.hpp"

namespace gcr {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("setting '" + key + "' expects a number, got '" + value + "'");
  return out;
}

}  // namespace

const std::vector<std::string>& known_setting_keys() {
  static const std::vector<std::string> keys = {
      "kg",          "qa",   "vocab",         "trie",          "out",        "hops",      "beam",
      "max_answer_tokens", "scorer", "scorer_key", "chat", "chat_endpoint", "chat_model", "chat_key",
      "cache_capacity", "jobs", "seed", "timeout_seconds", "retries"};
  return keys;
}

Settings parse_settings(std::istream& in) {
  Settings out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("config line is not key=value", line_no);
    auto key = trim(t.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    if (key.empty()) throw ParseError("config line has an empty key", line_no);
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

Settings read_settings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse_settings(in);
}

Settings env_settings(const std::function<const char*(const char*)>& getenv_fn) {
  Settings out;
  for (const auto& key : known_setting_keys()) {
    std::string name = "GCR_";
    for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = getenv_fn(name.c_str()); v && *v) out[key] = v;
  }
  return out;
}

void apply_settings(RunConfig& c, const Settings& settings) {
  for (const auto& [key, value] : settings) {
    if (key == "kg") c.kg = value;
    else if (key == "qa") c.qa = value;
    else if (key == "vocab") c.vocab = value;
    else if (key == "trie") c.trie = value;
    else if (key == "out") c.out = value;
    else if (key == "hops") c.hops = parse_number<std::uint32_t>(key, value);
    else if (key == "beam") c.beam = parse_number<std::size_t>(key, value);
    else if (key == "max_answer_tokens") c.max_answer_tokens = parse_number<std::size_t>(key, value);
    else if (key == "scorer") c.scorer = value;
    else if (key == "scorer_key") c.scorer_key = value;
    else if (key == "chat") c.chat = value;
    else if (key == "chat_endpoint") c.chat_endpoint = value;
    else if (key == "chat_model") c.chat_model = value;
    else if (key == "chat_key") c.chat_key = value;
    else if (key == "cache_capacity") c.cache_capacity = parse_number<std::size_t>(key, value);
    else if (key == "jobs") c.jobs = parse_number<unsigned>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "timeout_seconds") c.timeout_seconds = parse_number<double>(key, value);
    else if (key == "retries") c.retries = parse_number<int>(key, value);
    else throw ConfigError("unknown setting '" + key + "'");
  }
}

}  // namespace gcr
