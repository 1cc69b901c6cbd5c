#include "gcr/http.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>

#include "gcr/errors.hpp"

namespace gcr {

namespace {

class SlotGuard {
 public:
  SlotGuard(std::mutex& m, std::condition_variable& cv, std::size_t& in_flight, std::size_t limit)
      : m_(m), cv_(cv), in_flight_(in_flight) {
    std::unique_lock lock(m_);
    cv_.wait(lock, [&] { return in_flight_ < limit; });
    ++in_flight_;
  }
  ~SlotGuard() {
    {
      std::lock_guard lock(m_);
      --in_flight_;
    }
    cv_.notify_one();
  }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::mutex& m_;
  std::condition_variable& cv_;
  std::size_t& in_flight_;
};

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

JsonHttpClient::JsonHttpClient(HttpOptions options) : options_(std::move(options)) {
  const auto& ep = options_.endpoint;
  const auto scheme_end = ep.find("://");
  if (scheme_end == std::string::npos || ep.substr(0, scheme_end) != "http") {
    throw ConfigError("endpoint must be an http:// URL: '" + ep + "'");
  }
  const auto path_start = ep.find('/', scheme_end + 3);
  host_ = ep.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? "" : ep.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  if (options_.retries < 0) options_.retries = 0;
}

nlohmann::json JsonHttpClient::post(const std::string& path, const nlohmann::json& body) const {
  return send("POST", path, &body);
}

nlohmann::json JsonHttpClient::get(const std::string& path) const { return send("GET", path, nullptr); }

nlohmann::json JsonHttpClient::send(const std::string& method, const std::string& path,
                                    const nlohmann::json* body) const {
  SlotGuard slot(slots_mutex_, slots_cv_, in_flight_, options_.max_in_flight);

  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (options_.bearer) headers.emplace("Authorization", "Bearer " + *options_.bearer);

  const std::string url = base_path_ + path;
  const std::string payload = body ? body->dump() : std::string();
  auto backoff = options_.backoff_initial;
  for (int attempt = 0;; ++attempt) {
    ++requests_;
    auto res = method == "POST" ? client.Post(url, headers, payload, "application/json") : client.Get(url, headers);

    std::optional<TransportError> failure;
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
        failure.emplace(TransportErrorKind::kTimeout, "timeout after " + std::to_string(options_.timeout.count()) +
                                                          " ms contacting " + options_.endpoint + url);
      } else {
        failure.emplace(TransportErrorKind::kConnection,
                        "cannot reach " + options_.endpoint + url + ": " + httplib::to_string(err));
      }
    } else if (res->status < 200 || res->status >= 300) {
      std::string message = res->body;
      try {
        message = nlohmann::json::parse(res->body).at("error").get<std::string>();
      } catch (const nlohmann::json::exception&) {
      }
      failure.emplace(TransportErrorKind::kHttpStatus,
                      options_.endpoint + url + " returned HTTP " + std::to_string(res->status) + ": " + message);
      if (!retryable_status(res->status)) throw *failure;
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw TransportError(TransportErrorKind::kProtocol,
                             options_.endpoint + url + " returned invalid JSON: " + e.what());
      }
    }

    if (attempt >= options_.retries) throw *failure;
    ++retries_;
    std::this_thread::sleep_for(backoff);
    backoff = std::min(backoff * 2, options_.backoff_max);
  }
}

}  // namespace gcr
