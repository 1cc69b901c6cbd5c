#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gcr/http.hpp"

namespace gcr {

struct ChatReply {
  std::string content;
  // Server-reported usage, when available.
  std::optional<std::uint64_t> prompt_tokens;
  std::optional<std::uint64_t> completion_tokens;
};

// Single-turn completion against a general LLM. Safe for concurrent use.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatReply complete(const std::string& prompt) const = 0;

  std::uint64_t calls() const noexcept { return calls_.load(); }

 protected:
  void count_call() const noexcept { ++calls_; }

 private:
  mutable std::atomic<std::uint64_t> calls_{0};
};

struct ChatSettings {
  std::string endpoint;  // full URL of the chat-completions route
  std::string model;
  std::optional<std::string> api_key;
  std::chrono::milliseconds timeout{60000};
  int retries = 3;
  std::size_t max_in_flight = 4;
};

// POSTs {"model", "messages": [{"role": "user", "content": prompt}], "temperature": 0}
// and reads choices[0].message.content.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(ChatSettings settings);
  ChatReply complete(const std::string& prompt) const override;

 private:
  ChatSettings settings_;
  JsonHttpClient http_;
};

// Offline backend. Replay mode answers from a JSON-lines file of
// {"question": "...", "response": "..."} records: a record whose question
// appears in the prompt wins, otherwise question-less records are returned in
// file order. Majority mode answers with the most frequent hypothesis answer
// listed in an inductive-reasoning prompt.
class StubChatClient final : public ChatClient {
 public:
  static std::unique_ptr<StubChatClient> majority();
  static std::unique_ptr<StubChatClient> replay(const std::filesystem::path& file);
  static std::unique_ptr<StubChatClient> fixed(std::string response);

  ChatReply complete(const std::string& prompt) const override;

 private:
  enum class Mode { kMajority, kReplay, kFixed };

  explicit StubChatClient(Mode mode) : mode_(mode) {}

  Mode mode_;
  std::string fixed_;
  std::vector<std::pair<std::string, std::string>> keyed_;
  std::vector<std::string> ordered_;
  mutable std::mutex mutex_;
  mutable std::size_t next_ = 0;
};

// Hypothesis answers listed under "# Reasoning Paths:" in a reasoning prompt.
std::vector<std::string> hypotheses_in_prompt(const std::string& prompt);

}  // namespace gcr
