#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace gcr {

struct HttpOptions {
  std::string endpoint;                  // http://host:port[/base]
  std::optional<std::string> bearer;     // sent as "Authorization: Bearer ..."
  std::chrono::milliseconds timeout{30000};
  int retries = 3;                       // extra attempts after the first
  std::chrono::milliseconds backoff_initial{100};
  std::chrono::milliseconds backoff_max{2000};
  std::size_t max_in_flight = 8;
};

// JSON-over-HTTP with exponential backoff on connection failures, timeouts,
// 429 and 5xx. Requests are assumed idempotent. Throws TransportError.
class JsonHttpClient {
 public:
  explicit JsonHttpClient(HttpOptions options);

  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
  nlohmann::json get(const std::string& path) const;

  const std::string& endpoint() const noexcept { return options_.endpoint; }
  std::uint64_t requests() const noexcept { return requests_.load(); }
  std::uint64_t retries() const noexcept { return retries_.load(); }

 private:
  nlohmann::json send(const std::string& method, const std::string& path, const nlohmann::json* body) const;

  HttpOptions options_;
  std::string host_;       // scheme://host:port
  std::string base_path_;  // without trailing slash

  mutable std::mutex slots_mutex_;
  mutable std::condition_variable slots_cv_;
  mutable std::size_t in_flight_ = 0;

  mutable std::atomic<std::uint64_t> requests_{0};
  mutable std::atomic<std::uint64_t> retries_{0};
};

}  // namespace gcr
