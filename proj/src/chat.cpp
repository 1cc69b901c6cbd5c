#include "gcr/chat.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "gcr/codec.hpp"
#include "gcr/errors.hpp"
#include "gcr/kg.hpp"

namespace gcr {

namespace {

HttpOptions http_options(const ChatSettings& s) {
  HttpOptions o;
  o.endpoint = s.endpoint;
  o.bearer = s.api_key;
  o.timeout = s.timeout;
  o.retries = s.retries;
  o.max_in_flight = s.max_in_flight;
  return o;
}

std::string trim_copy(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

HttpChatClient::HttpChatClient(ChatSettings settings) : settings_(std::move(settings)), http_(http_options(settings_)) {
  if (settings_.model.empty()) throw ConfigError("chat model name is required");
}

ChatReply HttpChatClient::complete(const std::string& prompt) const {
  nlohmann::json body{{"model", settings_.model},
                      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
                      {"temperature", 0}};
  count_call();
  const auto j = http_.post("", body);
  ChatReply reply;
  try {
    reply.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      const auto& u = j["usage"];
      if (u.contains("prompt_tokens")) reply.prompt_tokens = u["prompt_tokens"].get<std::uint64_t>();
      if (u.contains("completion_tokens")) reply.completion_tokens = u["completion_tokens"].get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(TransportErrorKind::kProtocol,
                         settings_.endpoint + ": malformed chat completion: " + std::string(e.what()));
  }
  return reply;
}

std::unique_ptr<StubChatClient> StubChatClient::majority() {
  return std::unique_ptr<StubChatClient>(new StubChatClient(Mode::kMajority));
}

std::unique_ptr<StubChatClient> StubChatClient::fixed(std::string response) {
  auto c = std::unique_ptr<StubChatClient>(new StubChatClient(Mode::kFixed));
  c->fixed_ = std::move(response);
  return c;
}

std::unique_ptr<StubChatClient> StubChatClient::replay(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open stub chat file: " + file.string());
  auto c = std::unique_ptr<StubChatClient>(new StubChatClient(Mode::kReplay));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_copy(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto response = j.at("response").get<std::string>();
      if (j.contains("question")) {
        c->keyed_.emplace_back(j["question"].get<std::string>(), std::move(response));
      } else {
        c->ordered_.push_back(std::move(response));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad stub chat record: ") + e.what(), line_no);
    }
  }
  return c;
}

ChatReply StubChatClient::complete(const std::string& prompt) const {
  count_call();
  switch (mode_) {
    case Mode::kFixed:
      return ChatReply{fixed_, std::nullopt, std::nullopt};
    case Mode::kMajority: {
      const auto hyps = hypotheses_in_prompt(prompt);
      std::map<std::string, std::size_t> counts;
      std::vector<std::string> order;
      for (const auto& h : hyps) {
        if (counts[h]++ == 0) order.push_back(h);
      }
      std::string best;
      std::size_t best_count = 0;
      for (const auto& h : order) {
        if (counts[h] > best_count) {
          best = h;
          best_count = counts[h];
        }
      }
      return ChatReply{best.empty() ? std::string() : best + "\n", std::nullopt, std::nullopt};
    }
    case Mode::kReplay: {
      for (const auto& [question, response] : keyed_) {
        if (prompt.find("# Question:\n" + question + "\n") != std::string::npos) {
          return ChatReply{response, std::nullopt, std::nullopt};
        }
      }
      std::lock_guard lock(mutex_);
      if (next_ >= ordered_.size()) throw Error("stub chat backend has no response left for this prompt");
      return ChatReply{ordered_[next_++], std::nullopt, std::nullopt};
    }
  }
  return {};
}

std::vector<std::string> hypotheses_in_prompt(const std::string& prompt) {
  std::vector<std::string> out;
  std::istringstream in(prompt);
  std::string line;
  bool in_section = false;
  while (std::getline(in, line)) {
    if (line == "# Reasoning Paths:") {
      in_section = true;
      continue;
    }
    if (!in_section) continue;
    if (trim_copy(line).empty()) break;
    const auto close = line.rfind(kPathClose);
    if (close == std::string::npos) continue;
    auto answer = trim_copy(std::string_view(line).substr(close + kPathClose.size()));
    if (!answer.empty()) out.push_back(std::move(answer));
  }
  return out;
}

}  // namespace gcr
